#include "hitr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hitr/errors.hpp"
#include "hitr/log.hpp"

namespace hitr {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool is_ascii_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Rebuilds vocabulary frequency tables from the final document set, so the
// frequency invariants hold by construction.
void recount_frequencies(Corpus& corpus) {
  auto& vocab = corpus.vocabulary;
  vocab.doc_frequency.assign(vocab.size(), 0);
  vocab.collection_frequency.assign(vocab.size(), 0);
  for (const auto& doc : corpus.documents) {
    for (const auto& [wid, count] : doc.counts) {
      vocab.doc_frequency[wid] += 1;
      vocab.collection_frequency[wid] += count;
    }
  }
}

std::string read_whole_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

long Vocabulary::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? -1 : static_cast<long>(it->second);
}

std::uint64_t Document::count_of(WordId w) const {
  auto it = std::lower_bound(
      counts.begin(), counts.end(), w,
      [](const std::pair<WordId, std::uint32_t>& e, WordId key) {
        return e.first < key;
      });
  if (it == counts.end() || it->first != w) return 0;
  return it->second;
}

std::uint64_t Corpus::total_tokens() const {
  std::uint64_t total = 0;
  for (const auto& doc : documents) total += doc.length;
  return total;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      if (!current.empty()) {
        tokens.push_back(current);
        current.clear();
      }
      continue;
    }
    if (is_ascii_alpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
    // punctuation, digits and non-ASCII bytes are stripped in place
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

Corpus build_corpus(const std::vector<RawDocument>& raw_docs,
                    const std::unordered_set<std::string>& stopwords,
                    std::size_t top_k_remove, std::uint64_t min_count) {
  if (min_count < 1) throw DataError("min_count must be at least 1");

  std::vector<std::vector<std::string>> doc_tokens;
  doc_tokens.reserve(raw_docs.size());

  // Token statistics in first-occurrence order.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<std::size_t, std::uint64_t>>
      stats;  // token -> (first-occurrence rank, collection frequency)
  for (const auto& raw : raw_docs) {
    doc_tokens.push_back(tokenize(raw.text));
    for (const auto& token : doc_tokens.back()) {
      auto [it, inserted] = stats.try_emplace(token, order.size(), 0);
      if (inserted) order.push_back(token);
      it->second.second += 1;
    }
  }

  Corpus corpus;
  std::unordered_set<std::string> removed;

  for (const auto& token : order) {
    if (stopwords.count(token)) {
      removed.insert(token);
      corpus.preprocess_log.removed_stopwords.push_back(token);
    }
  }

  if (top_k_remove > 0) {
    std::vector<const std::string*> candidates;
    for (const auto& token : order) {
      if (!removed.count(token)) candidates.push_back(&token);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const std::string* a, const std::string* b) {
                const auto& sa = stats.at(*a);
                const auto& sb = stats.at(*b);
                if (sa.second != sb.second) return sa.second > sb.second;
                return sa.first < sb.first;
              });
    for (std::size_t i = 0; i < top_k_remove && i < candidates.size(); ++i) {
      removed.insert(*candidates[i]);
      corpus.preprocess_log.removed_top_frequency.push_back(*candidates[i]);
    }
  }

  for (const auto& token : order) {
    if (removed.count(token)) continue;
    if (stats.at(token).second < min_count) {
      removed.insert(token);
      corpus.preprocess_log.removed_rare.push_back(token);
    }
  }

  auto& vocab = corpus.vocabulary;
  for (const auto& token : order) {
    if (removed.count(token)) continue;
    vocab.index.emplace(token, static_cast<WordId>(vocab.words.size()));
    vocab.words.push_back(token);
  }

  for (std::size_t d = 0; d < raw_docs.size(); ++d) {
    std::map<WordId, std::uint32_t> counts;
    for (const auto& token : doc_tokens[d]) {
      auto it = vocab.index.find(token);
      if (it != vocab.index.end()) counts[it->second] += 1;
    }
    if (counts.empty()) {
      corpus.preprocess_log.dropped_documents.push_back(raw_docs[d].id);
      continue;
    }
    Document doc;
    doc.id = raw_docs[d].id;
    doc.group = raw_docs[d].group;
    doc.class_label = raw_docs[d].class_label;
    for (const auto& [wid, count] : counts) {
      doc.counts.emplace_back(wid, count);
      doc.length += count;
    }
    corpus.documents.push_back(std::move(doc));
  }

  if (corpus.documents.empty()) {
    throw DataError("every document is empty after preprocessing");
  }
  recount_frequencies(corpus);
  if (!corpus.preprocess_log.dropped_documents.empty()) {
    log_info("preprocessing dropped " +
             std::to_string(corpus.preprocess_log.dropped_documents.size()) +
             " empty documents");
  }
  return corpus;
}

Corpus corpus_from_counts(const std::vector<CountedDocument>& docs) {
  Corpus corpus;
  auto& vocab = corpus.vocabulary;
  for (const auto& cd : docs) {
    std::map<WordId, std::uint32_t> counts;
    for (const auto& [token, count] : cd.token_counts) {
      if (count == 0) continue;
      auto [it, inserted] =
          vocab.index.try_emplace(token, static_cast<WordId>(vocab.words.size()));
      if (inserted) vocab.words.push_back(token);
      counts[it->second] += count;
    }
    if (counts.empty()) {
      corpus.preprocess_log.dropped_documents.push_back(cd.id);
      continue;
    }
    Document doc;
    doc.id = cd.id;
    doc.group = cd.group;
    doc.class_label = cd.class_label;
    for (const auto& [wid, count] : counts) {
      doc.counts.emplace_back(wid, count);
      doc.length += count;
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) {
    throw DataError("corpus_from_counts produced no nonempty documents");
  }
  recount_frequencies(corpus);
  return corpus;
}

SparseDistribution collection_language_model(const Corpus& corpus) {
  MassVector mass;
  const auto& cf = corpus.vocabulary.collection_frequency;
  mass.reserve(cf.size());
  for (WordId w = 0; w < cf.size(); ++w) {
    if (cf[w] > 0) mass.emplace_back(w, static_cast<double>(cf[w]));
  }
  return SparseDistribution::from_mass(std::move(mass));
}

Corpus translate_corpus(const Corpus& source,
                        const std::vector<std::string>& target_tokens) {
  Corpus corpus;
  auto& vocab = corpus.vocabulary;
  vocab.words = target_tokens;
  for (WordId w = 0; w < target_tokens.size(); ++w) {
    if (!vocab.index.emplace(target_tokens[w], w).second) {
      throw DataError("target vocabulary repeats token '" + target_tokens[w] +
                      "'");
    }
  }

  for (const auto& src : source.documents) {
    std::map<WordId, std::uint32_t> counts;
    for (const auto& [wid, count] : src.counts) {
      const std::string& token = source.vocabulary.words[wid];
      auto it = vocab.index.find(token);
      if (it != vocab.index.end()) counts[it->second] += count;
    }
    if (counts.empty()) {
      throw DataError("document '" + src.id +
                      "' shares no words with the model vocabulary");
    }
    Document doc;
    doc.id = src.id;
    doc.group = src.group;
    doc.class_label = src.class_label;
    for (const auto& [wid, count] : counts) {
      doc.counts.emplace_back(wid, count);
      doc.length += count;
    }
    corpus.documents.push_back(std::move(doc));
  }
  recount_frequencies(corpus);
  return corpus;
}

std::vector<RawDocument> load_raw_directory(const std::string& dir_path) {
  namespace fs = std::filesystem;
  fs::path dir(dir_path);
  if (!fs::is_directory(dir)) {
    throw DataError(dir_path + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw DataError("no .txt files in " + dir_path);
  }
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> docs;
  docs.reserve(files.size());
  for (const auto& path : files) {
    docs.push_back(RawDocument{path.stem().string(), read_whole_file(path),
                               /*group=*/"", /*class_label=*/""});
  }
  return docs;
}

std::vector<RawDocument> load_raw_jsonl(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + file_path);
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file_path + ":" + std::to_string(line_no) +
                      ": invalid JSON: " + e.what());
    }
    if (!record.is_object() || !record.contains("id") ||
        !record.contains("text")) {
      throw DataError(file_path + ":" + std::to_string(line_no) +
                      ": each line needs at least {\"id\", \"text\"}");
    }
    RawDocument doc;
    doc.id = record.at("id").get<std::string>();
    doc.text = record.at("text").get<std::string>();
    if (record.contains("group") && !record.at("group").is_null()) {
      doc.group = record.at("group").get<std::string>();
    }
    if (record.contains("label") && !record.at("label").is_null()) {
      doc.class_label = record.at("label").get<std::string>();
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) {
    throw DataError(file_path + " contains no documents");
  }
  return docs;
}

std::unordered_set<std::string> load_stopwords(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + file_path);
  std::unordered_set<std::string> stopwords;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() &&
           (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    stopwords.insert(line.substr(start));
  }
  return stopwords;
}

}  // namespace hitr
