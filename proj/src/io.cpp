#include "hitr/io.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hitr/errors.hpp"

namespace hitr::io {

namespace {

using nlohmann::json;

constexpr int kGzipLevel = 6;  // fixed so equal content gives equal bytes

std::string gzip_compress(const std::string& input) {
  z_stream stream{};
  if (deflateInit2(&stream, kGzipLevel, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw DataError("zlib deflate initialization failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
  stream.avail_in = static_cast<uInt>(input.size());
  std::string output;
  char buffer[1 << 16];
  int rc;
  do {
    stream.next_out = reinterpret_cast<Bytef*>(buffer);
    stream.avail_out = sizeof(buffer);
    rc = deflate(&stream, Z_FINISH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      deflateEnd(&stream);
      throw DataError("gzip compression failed");
    }
    output.append(buffer, sizeof(buffer) - stream.avail_out);
  } while (rc != Z_STREAM_END);
  deflateEnd(&stream);
  return output;
}

std::string gzip_decompress(const std::string& input, const std::string& path) {
  z_stream stream{};
  if (inflateInit2(&stream, 15 + 32) != Z_OK) {
    throw DataError("zlib inflate initialization failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
  stream.avail_in = static_cast<uInt>(input.size());
  std::string output;
  char buffer[1 << 16];
  int rc;
  do {
    stream.next_out = reinterpret_cast<Bytef*>(buffer);
    stream.avail_out = sizeof(buffer);
    rc = inflate(&stream, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&stream);
      throw DataError(path + " is not valid gzip data");
    }
    output.append(buffer, sizeof(buffer) - stream.avail_out);
  } while (rc != Z_STREAM_END);
  inflateEnd(&stream);
  return output;
}

std::string read_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

void expect_format(const json& j, const std::string& path,
                   const std::string& format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw DataError(path + " is not a " + format + " file");
  }
  if (j.value("version", 0) != 1) {
    throw DataError(path + ": unsupported " + format + " version");
  }
}

json probabilities_to_json(const SparseDistribution& dist) {
  json row = json::array();
  for (const auto& [id, p] : dist.entries()) {
    row.push_back(json::array({id, round_probability(p)}));
  }
  return row;
}

SparseDistribution probabilities_from_json(const json& row,
                                           const std::string& where) {
  MassVector entries;
  entries.reserve(row.size());
  for (const auto& cell : row) {
    if (!cell.is_array() || cell.size() != 2) {
      throw DataError(where + ": rows must be [[id, probability], ...]");
    }
    entries.emplace_back(cell.at(0).get<ItemId>(), cell.at(1).get<double>());
  }
  try {
    return SparseDistribution::from_normalized(std::move(entries));
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
}

json optional_to_json(const std::optional<double>& v) {
  return v.has_value() ? json(*v) : json(nullptr);
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string crc32_hex(std::uint32_t crc) {
  char buffer[9];
  std::snprintf(buffer, sizeof(buffer), "%08x", crc);
  return buffer;
}

}  // namespace

bool is_gzip_path(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::string read_text_file(const std::string& path) {
  std::string raw = read_raw(path);
  if (is_gzip_path(path)) return gzip_decompress(raw, path);
  return raw;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  if (is_gzip_path(path)) {
    std::string compressed = gzip_compress(content);
    out.write(compressed.data(), static_cast<std::streamsize>(compressed.size()));
  } else {
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  if (!out) throw DataError("failed while writing " + path);
}

std::uint32_t crc32_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size())));
}

std::uint32_t crc32_file(const std::string& path) {
  return crc32_of(read_raw(path));
}

double round_probability(double p) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", p);
  return std::strtod(buffer, nullptr);
}

std::string format_double(double v) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  if (ec != std::errc{}) throw DataError("failed to format a number");
  return std::string(buffer, end);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  json docs = json::array();
  for (const auto& doc : corpus.documents) {
    json counts = json::array();
    for (const auto& [wid, count] : doc.counts) {
      counts.push_back(json::array({wid, count}));
    }
    json entry = {{"id", doc.id}, {"counts", std::move(counts)}};
    if (!doc.group.empty()) entry["group"] = doc.group;
    if (!doc.class_label.empty()) entry["label"] = doc.class_label;
    docs.push_back(std::move(entry));
  }
  json j = {{"format", "hitr-corpus"},
            {"version", 1},
            {"vocab", corpus.vocabulary.words},
            {"docs", std::move(docs)}};
  write_text_file(path, j.dump());
}

Corpus load_corpus(const std::string& path) {
  json j = parse_json(path);
  expect_format(j, path, "hitr-corpus");

  Corpus corpus;
  auto& vocab = corpus.vocabulary;
  for (const auto& token : j.at("vocab")) {
    std::string word = token.get<std::string>();
    if (!vocab.index.emplace(word, static_cast<WordId>(vocab.words.size()))
             .second) {
      throw DataError(path + ": vocabulary repeats token '" + word + "'");
    }
    vocab.words.push_back(std::move(word));
  }
  vocab.doc_frequency.assign(vocab.size(), 0);
  vocab.collection_frequency.assign(vocab.size(), 0);

  for (const auto& entry : j.at("docs")) {
    Document doc;
    doc.id = entry.at("id").get<std::string>();
    doc.group = entry.value("group", "");
    doc.class_label = entry.value("label", "");
    std::map<WordId, std::uint64_t> counts;
    for (const auto& cell : entry.at("counts")) {
      if (!cell.is_array() || cell.size() != 2) {
        throw DataError(path + ": document '" + doc.id +
                        "': counts must be [[word_id, count], ...]");
      }
      auto wid = cell.at(0).get<WordId>();
      auto count = cell.at(1).get<std::uint64_t>();
      if (wid >= vocab.size()) {
        throw DataError(path + ": document '" + doc.id + "' uses word id " +
                        std::to_string(wid) + " outside the vocabulary");
      }
      if (count == 0) {
        throw DataError(path + ": document '" + doc.id +
                        "' has a zero count for word id " + std::to_string(wid));
      }
      counts[wid] += count;
    }
    if (counts.empty()) {
      throw DataError(path + ": document '" + doc.id + "' has no counts");
    }
    for (const auto& [wid, count] : counts) {
      doc.counts.emplace_back(wid, static_cast<std::uint32_t>(count));
      doc.length += count;
      vocab.doc_frequency[wid] += 1;
      vocab.collection_frequency[wid] += count;
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) {
    throw DataError(path + " contains no documents");
  }
  return corpus;
}

void save_model(const TopicModel& model, const std::string& path) {
  json phi = json::array();
  for (const auto& row : model.phi) phi.push_back(probabilities_to_json(row));
  json theta = json::array();
  for (const auto& row : model.theta) theta.push_back(probabilities_to_json(row));

  // Stage timings stay out of the file on purpose: model files must be
  // byte-identical across reruns, and wall clock never is. The CLI records
  // timings in the run manifest instead.
  json j = {
      {"format", "hitr-model"},
      {"version", 1},
      {"config",
       {{"num_topics", model.config.num_topics},
        {"alpha", model.config.alpha},
        {"beta", model.config.beta},
        {"train_iterations", model.config.train_iterations},
        {"burn_in", model.config.burn_in},
        {"average_sweeps", model.config.average_sweeps},
        {"seed", model.config.seed}}},
      {"provenance",
       {{"variant", model.provenance.variant},
        {"lambda_dr", optional_to_json(model.provenance.lambda_dr)},
        {"lambda_tr", optional_to_json(model.provenance.lambda_tr)},
        {"lambda_tar", optional_to_json(model.provenance.lambda_tar)},
        {"seed", model.provenance.seed}}},
      {"vocab_ref", model.vocab},
      {"doc_ids", model.doc_ids},
      {"phi", std::move(phi)},
      {"theta", std::move(theta)}};
  write_text_file(path, j.dump());
}

TopicModel load_model(const std::string& path) {
  json j = parse_json(path);
  expect_format(j, path, "hitr-model");

  TopicModel model;
  const json& config = j.at("config");
  model.config.num_topics = config.at("num_topics").get<std::uint32_t>();
  model.config.alpha = config.at("alpha").get<double>();
  model.config.beta = config.at("beta").get<double>();
  model.config.train_iterations = config.at("train_iterations").get<std::uint32_t>();
  model.config.burn_in = config.at("burn_in").get<std::uint32_t>();
  model.config.average_sweeps = config.at("average_sweeps").get<std::uint32_t>();
  model.config.seed = config.at("seed").get<std::uint64_t>();

  const json& provenance = j.at("provenance");
  model.provenance.variant = provenance.at("variant").get<std::string>();
  model.provenance.lambda_dr = optional_from_json(provenance.at("lambda_dr"));
  model.provenance.lambda_tr = optional_from_json(provenance.at("lambda_tr"));
  model.provenance.lambda_tar = optional_from_json(provenance.at("lambda_tar"));
  model.provenance.seed = provenance.at("seed").get<std::uint64_t>();

  model.vocab = j.at("vocab_ref").get<std::vector<std::string>>();
  model.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();

  std::size_t t = 0;
  for (const auto& row : j.at("phi")) {
    model.phi.push_back(probabilities_from_json(
        row, path + ": phi row " + std::to_string(t++)));
  }
  std::size_t d = 0;
  for (const auto& row : j.at("theta")) {
    model.theta.push_back(probabilities_from_json(
        row, path + ": theta row " + std::to_string(d++)));
  }

  if (model.phi.size() != model.config.num_topics) {
    throw DataError(path + ": phi row count does not match num_topics");
  }
  if (model.theta.size() != model.doc_ids.size()) {
    throw DataError(path + ": theta row count does not match doc_ids");
  }
  return model;
}

void write_scores_csv(const std::string& path,
                      const std::vector<std::string>& doc_ids,
                      const std::vector<double>& scores) {
  std::string out = "doc_id,diversity\n";
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    out += doc_ids[i];
    out += ',';
    out += format_double(scores[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_roc_csv(const std::string& path, const RocResult& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& point : roc.points) {
    out += format_double(point.threshold);
    out += ',';
    out += format_double(point.fpr);
    out += ',';
    out += format_double(point.tpr);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& rows) {
  std::string out = "lambda,auc\n";
  for (const auto& [lambda, auc] : rows) {
    out += format_double(lambda);
    out += ',';
    out += format_double(auc);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_coherence_csv(const std::string& path,
                         const CoherenceReport& report) {
  std::string out = "topic_id,npmi\n";
  for (std::size_t t = 0; t < report.per_topic.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_double(report.per_topic[t]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_features_csv(const std::string& path,
                        const DocumentTopicMatrix& theta,
                        const std::vector<std::string>& labels,
                        std::uint32_t num_topics) {
  std::string out = "doc_id,label";
  for (std::uint32_t t = 0; t < num_topics; ++t) {
    out += ",topic_";
    out += std::to_string(t);
  }
  out += '\n';
  for (std::size_t d = 0; d < theta.rows.size(); ++d) {
    out += theta.doc_ids[d];
    out += ',';
    out += labels[d];
    for (std::uint32_t t = 0; t < num_topics; ++t) {
      out += ',';
      out += format_double(theta.rows[d].prob(t));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_distance_csv(const std::string& path,
                        const std::vector<std::vector<double>>& matrix) {
  std::string out;
  for (const auto& row : matrix) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json outputs = json::array();
  for (const auto& output : manifest.outputs) {
    outputs.push_back(
        {{"path", output}, {"crc32", crc32_hex(crc32_file(output))}});
  }
  json j = {{"format", "hitr-manifest"},
            {"version", 1},
            {"command", manifest.command},
            {"config", manifest.config},
            {"inputs", manifest.inputs},
            {"outputs", std::move(outputs)},
            {"seed", manifest.seed},
            {"wall_clock_ms", manifest.wall_clock_ms}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace hitr::io
