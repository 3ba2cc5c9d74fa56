#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hitr/corpus.hpp"
#include "hitr/diversity.hpp"
#include "hitr/errors.hpp"
#include "hitr/evalkit.hpp"
#include "hitr/io.hpp"
#include "hitr/lda.hpp"
#include "hitr/log.hpp"
#include "hitr/parallel.hpp"
#include "hitr/pipeline.hpp"

namespace {

using nlohmann::json;

// Every run writes a manifest next to its primary output, recording the
// command, effective config, inputs/outputs and wall clock.
struct RunContext {
  std::string command;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void finish(const std::string& primary_output) {
    hitr::io::RunManifest manifest;
    manifest.command = command;
    manifest.config = config;
    manifest.inputs = inputs;
    manifest.outputs = outputs;
    manifest.seed = seed;
    manifest.wall_clock_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
    hitr::io::write_manifest(manifest, primary_output + ".manifest.json");
  }
};

struct LdaOpts {
  std::uint32_t topics = 100;
  std::string alpha = "auto";
  double beta = 0.01;
  std::uint32_t iters = 1000;
  std::uint32_t burn_in = 800;
  std::uint32_t average_sweeps = 1;
};

struct ParsimonyOpts {
  double prune_threshold = 1e-4;
  std::uint32_t max_em_iters = 50;
  double em_tol = 1e-6;
};

struct StageOpts {
  double lambda_dr = 0.4;
  double lambda_tr = 0.7;
  double lambda_tar = 0.03;
  std::uint32_t fold_in_iters = 50;
  double bg_epsilon = 1e-12;
};

struct SyntheticOpts {
  std::vector<std::string> pairs;
  std::vector<std::string> groups;
  std::uint32_t docs_per_pair = 50;
  std::uint32_t docs_per_group = 25;
};

double parse_alpha(const std::string& raw) {
  if (raw == "auto") return 0.0;
  return std::strtod(raw.c_str(), nullptr);
}

json timings_json(const hitr::Provenance& provenance) {
  json timings = json::object();
  for (const auto& [stage, ms] : provenance.stage_timings_ms) {
    timings[stage] = ms;
  }
  return timings;
}

void add_lda_options(CLI::App* cmd, LdaOpts& opts) {
  cmd->add_option("--topics", opts.topics, "Number of topics")
      ->capture_default_str();
  cmd->add_option("--alpha", opts.alpha,
                  "Dirichlet prior on topic mixtures; 'auto' = 1/topics")
      ->capture_default_str()
      ->check(CLI::Validator(
          [](std::string& value) -> std::string {
            if (value == "auto") return {};
            char* end = nullptr;
            double v = std::strtod(value.c_str(), &end);
            if (end != value.c_str() + value.size() || !(v > 0.0)) {
              return "must be 'auto' or a positive number";
            }
            return {};
          },
          "ALPHA"));
  cmd->add_option("--beta", opts.beta, "Dirichlet prior on topic-word rows")
      ->capture_default_str();
  cmd->add_option("--iters", opts.iters, "Gibbs sweeps")
      ->capture_default_str();
  cmd->add_option("--burn-in", opts.burn_in, "Discarded initial sweeps")
      ->capture_default_str();
  cmd->add_option("--average-sweeps", opts.average_sweeps,
                  "Average counts over the last N sweeps")
      ->capture_default_str();
}

void add_parsimony_options(CLI::App* cmd, ParsimonyOpts& opts) {
  cmd->add_option("--prune-threshold", opts.prune_threshold,
                  "Drop re-estimated entries below this probability")
      ->capture_default_str();
  cmd->add_option("--max-em-iters", opts.max_em_iters,
                  "Re-estimation EM iteration cap")
      ->capture_default_str();
  cmd->add_option("--em-tol", opts.em_tol,
                  "Stop EM when the max per-entry change falls below")
      ->capture_default_str();
}

void add_stage_options(CLI::App* cmd, StageOpts& opts, bool with_lambdas) {
  if (with_lambdas) {
    cmd->add_option("--lambda-dr", opts.lambda_dr,
                    "Specific-model weight for document re-estimation")
        ->capture_default_str();
    cmd->add_option("--lambda-tr", opts.lambda_tr,
                    "Specific-model weight for topic re-estimation")
        ->capture_default_str();
    cmd->add_option("--lambda-tar", opts.lambda_tar,
                    "Specific-model weight for assignment re-estimation")
        ->capture_default_str();
  }
  cmd->add_option("--fold-in-iters", opts.fold_in_iters,
                  "Gibbs sweeps when folding documents into a fixed model")
      ->capture_default_str();
  cmd->add_option("--bg-epsilon", opts.bg_epsilon,
                  "Background smoothing added before TR/TAR normalization")
      ->capture_default_str();
}

void add_synthetic_options(CLI::App* cmd, SyntheticOpts& opts) {
  cmd->add_option("--pair", opts.pairs,
                  "Diverse group pair GROUP:GROUP (repeatable; default "
                  "pairs consecutive groups)");
  cmd->add_option("--nondiverse-group", opts.groups,
                  "Group for non-diverse documents (repeatable; default all "
                  "groups)");
  cmd->add_option("--docs-per-pair", opts.docs_per_pair,
                  "Diverse documents per pair")
      ->capture_default_str();
  cmd->add_option("--docs-per-group", opts.docs_per_group,
                  "Non-diverse documents per group")
      ->capture_default_str();
}

hitr::LdaConfig to_lda_config(const LdaOpts& opts) {
  hitr::LdaConfig config;
  config.num_topics = opts.topics;
  config.alpha = parse_alpha(opts.alpha);
  config.beta = opts.beta;
  config.train_iterations = opts.iters;
  config.burn_in = opts.burn_in;
  config.average_sweeps = opts.average_sweeps;
  return config;
}

hitr::ParsimonyConfig to_parsimony_config(const ParsimonyOpts& opts) {
  hitr::ParsimonyConfig config;
  config.prune_threshold = opts.prune_threshold;
  config.max_iterations = opts.max_em_iters;
  config.convergence_tol = opts.em_tol;
  return config;
}

hitr::ReestimationConfig to_reestimation_config(const StageOpts& stage,
                                                const ParsimonyOpts& parsimony,
                                                const LdaOpts& lda) {
  hitr::ReestimationConfig config;
  config.lambda_dr = stage.lambda_dr;
  config.lambda_tr = stage.lambda_tr;
  config.lambda_tar = stage.lambda_tar;
  config.parsimony = to_parsimony_config(parsimony);
  config.lda = to_lda_config(lda);
  config.background_smoothing_epsilon = stage.bg_epsilon;
  config.fold_in_iterations = stage.fold_in_iters;
  return config;
}

hitr::SyntheticSpec to_synthetic_spec(const SyntheticOpts& opts,
                                      const hitr::Corpus& corpus,
                                      std::uint64_t seed) {
  hitr::SyntheticSpec spec;
  spec.docs_per_pair = opts.docs_per_pair;
  spec.docs_per_group = opts.docs_per_group;
  spec.seed = seed;
  for (const auto& raw : opts.pairs) {
    auto colon = raw.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == raw.size()) {
      throw hitr::DataError("--pair expects GROUP:GROUP, got '" + raw + "'");
    }
    spec.group_pairs.emplace_back(raw.substr(0, colon), raw.substr(colon + 1));
  }
  spec.nondiverse_groups = opts.groups;
  if (spec.group_pairs.empty() || spec.nondiverse_groups.empty()) {
    // Each option defaults independently: omitted pairs become consecutive
    // corpus groups in first-occurrence order, an omitted non-diverse list
    // becomes every group.
    std::vector<std::string> groups;
    for (const auto& doc : corpus.documents) {
      if (!doc.group.empty() &&
          std::find(groups.begin(), groups.end(), doc.group) == groups.end()) {
        groups.push_back(doc.group);
      }
    }
    if (spec.group_pairs.empty()) {
      if (groups.size() < 2) {
        throw hitr::DataError("the corpus needs at least two groups to build "
                              "a synthetic benchmark");
      }
      for (std::size_t i = 0; i + 1 < groups.size(); i += 2) {
        spec.group_pairs.emplace_back(groups[i], groups[i + 1]);
      }
    }
    if (spec.nondiverse_groups.empty()) {
      if (groups.empty()) {
        throw hitr::DataError(
            "the corpus has no groups to draw non-diverse documents from");
      }
      spec.nondiverse_groups = groups;
    }
  }
  return spec;
}

json lda_config_json(const LdaOpts& opts, std::uint64_t seed) {
  return json{{"topics", opts.topics},      {"alpha", opts.alpha},
              {"beta", opts.beta},          {"iters", opts.iters},
              {"burn_in", opts.burn_in},    {"average_sweeps", opts.average_sweeps},
              {"seed", seed}};
}

json parsimony_config_json(const ParsimonyOpts& opts) {
  return json{{"prune_threshold", opts.prune_threshold},
              {"max_em_iters", opts.max_em_iters},
              {"em_tol", opts.em_tol}};
}

std::vector<hitr::LabeledScore> scores_against_labels(
    const std::vector<std::pair<std::string, double>>& scores,
    const hitr::Corpus& labeled) {
  std::unordered_map<std::string, int> label_of;
  for (const auto& doc : labeled.documents) {
    if (doc.class_label.empty()) {
      throw hitr::DataError("document '" + doc.id + "' carries no label");
    }
    label_of[doc.id] = hitr::binary_label(doc.class_label);
  }
  std::vector<hitr::LabeledScore> labeled_scores;
  labeled_scores.reserve(scores.size());
  for (const auto& [id, score] : scores) {
    auto it = label_of.find(id);
    if (it == label_of.end()) {
      throw hitr::DataError("no label for scored document '" + id + "'");
    }
    labeled_scores.push_back(hitr::LabeledScore{id, score, it->second});
  }
  return labeled_scores;
}

std::vector<std::pair<std::string, double>> read_scores_csv(
    const std::string& path) {
  std::string content = hitr::io::read_text_file(path);
  std::vector<std::pair<std::string, double>> scores;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    std::string line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("doc_id,", 0) == 0) continue;
    }
    auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw hitr::DataError(path + ": malformed CSV line '" + line + "'");
    }
    char* end = nullptr;
    const std::string value = line.substr(comma + 1);
    double score = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty()) {
      throw hitr::DataError(path + ": '" + value + "' is not a number");
    }
    scores.emplace_back(line.substr(0, comma), score);
  }
  if (scores.empty()) throw hitr::DataError(path + " contains no scores");
  return scores;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Topical-diversity toolkit: LDA with hierarchical re-estimation "
      "(document, topic and topic-assignment), Rao diversity scoring and an "
      "evaluation kit"};
  app.require_subcommand(1);
  unsigned jobs = 1;
  app.add_option("--jobs", jobs,
                 "Worker threads for parallel stages (0 = all cores)")
      ->capture_default_str();

  // ---- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "Tokenize and filter raw text into a corpus file");
  struct {
    std::string input, output, stopwords;
    std::size_t top_k_remove = 100;
    std::uint64_t min_count = 5;
  } ingest_opts;
  ingest->add_option("--input", ingest_opts.input,
                     "Directory of .txt files or a JSON-lines file")
      ->required()
      ->check(CLI::ExistingPath);
  ingest->add_option("--output", ingest_opts.output, "Corpus JSON (.gz ok)")
      ->required();
  ingest->add_option("--stopwords", ingest_opts.stopwords,
                     "Stopword file, one token per line")
      ->check(CLI::ExistingFile);
  ingest->add_option("--top-k-remove", ingest_opts.top_k_remove,
                     "Remove the K most frequent remaining words")
      ->capture_default_str();
  ingest->add_option("--min-count", ingest_opts.min_count,
                     "Remove words occurring fewer times than this")
      ->capture_default_str();
  ingest->callback([&] {
    RunContext ctx;
    ctx.command = "ingest";
    ctx.inputs = {ingest_opts.input};
    ctx.config = {{"top_k_remove", ingest_opts.top_k_remove},
                  {"min_count", ingest_opts.min_count},
                  {"stopwords", ingest_opts.stopwords}};
    std::vector<hitr::RawDocument> raw =
        std::filesystem::is_directory(ingest_opts.input)
            ? hitr::load_raw_directory(ingest_opts.input)
            : hitr::load_raw_jsonl(ingest_opts.input);
    std::unordered_set<std::string> stopwords;
    if (!ingest_opts.stopwords.empty()) {
      stopwords = hitr::load_stopwords(ingest_opts.stopwords);
      ctx.inputs.push_back(ingest_opts.stopwords);
    }
    hitr::Corpus corpus =
        hitr::build_corpus(raw, stopwords, ingest_opts.top_k_remove,
                           ingest_opts.min_count);
    hitr::io::save_corpus(corpus, ingest_opts.output);
    ctx.outputs = {ingest_opts.output};
    ctx.finish(ingest_opts.output);
  });

  // ---- train -----------------------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train", "Train a topic model on a corpus");
  struct {
    std::string corpus, output;
    LdaOpts lda;
    std::uint64_t seed = 1;
  } train_opts;
  train_cmd->add_option("--corpus", train_opts.corpus, "Corpus JSON")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--output", train_opts.output, "Model JSON (.gz ok)")
      ->required();
  add_lda_options(train_cmd, train_opts.lda);
  train_cmd->add_option("--seed", train_opts.seed, "Run seed")
      ->capture_default_str();
  train_cmd->callback([&] {
    hitr::set_max_jobs(jobs);
    RunContext ctx;
    ctx.command = "train";
    ctx.seed = train_opts.seed;
    ctx.inputs = {train_opts.corpus};
    ctx.config = lda_config_json(train_opts.lda, train_opts.seed);
    hitr::Corpus corpus = hitr::io::load_corpus(train_opts.corpus);
    hitr::ReestimationConfig config;
    config.lda = to_lda_config(train_opts.lda);
    hitr::PipelineResult result = hitr::run_pipeline(
        corpus, hitr::PipelineVariant::kLda, config, train_opts.seed);
    hitr::io::save_model(result.model, train_opts.output);
    ctx.config["stage_timings_ms"] = timings_json(result.model.provenance);
    ctx.outputs = {train_opts.output};
    ctx.finish(train_opts.output);
  });

  // ---- reestimate ------------------------------------------------------
  auto* reestimate = app.add_subcommand(
      "reestimate",
      "Run a re-estimation variant from a corpus (variants with document "
      "re-estimation) or on top of a trained model");
  struct {
    std::string corpus, model, output, variant;
    LdaOpts lda;
    ParsimonyOpts parsimony;
    StageOpts stages;
    std::uint64_t seed = 1;
  } re_opts;
  reestimate
      ->add_option("--variant", re_opts.variant,
                   "lda, dr, tr, tar, dr+tr, dr+tar, tr+tar or hitr")
      ->required()
      ->check(CLI::IsMember(
          {"lda", "dr", "tr", "tar", "dr+tr", "dr+tar", "tr+tar", "hitr"}));
  reestimate->add_option("--corpus", re_opts.corpus, "Corpus JSON")
      ->check(CLI::ExistingFile);
  reestimate->add_option("--model", re_opts.model, "Trained model JSON")
      ->check(CLI::ExistingFile);
  reestimate->add_option("--output", re_opts.output, "Model JSON (.gz ok)")
      ->required();
  add_lda_options(reestimate, re_opts.lda);
  add_parsimony_options(reestimate, re_opts.parsimony);
  add_stage_options(reestimate, re_opts.stages, /*with_lambdas=*/true);
  reestimate->add_option("--seed", re_opts.seed, "Run seed")
      ->capture_default_str();
  reestimate->callback([&] {
    hitr::set_max_jobs(jobs);
    hitr::PipelineVariant variant = hitr::variant_from_string(re_opts.variant);
    RunContext ctx;
    ctx.command = "reestimate";
    ctx.seed = re_opts.seed;
    ctx.config = {{"variant", re_opts.variant},
                  {"lambda_dr", re_opts.stages.lambda_dr},
                  {"lambda_tr", re_opts.stages.lambda_tr},
                  {"lambda_tar", re_opts.stages.lambda_tar},
                  {"fold_in_iters", re_opts.stages.fold_in_iters},
                  {"bg_epsilon", re_opts.stages.bg_epsilon},
                  {"parsimony", parsimony_config_json(re_opts.parsimony)},
                  {"lda", lda_config_json(re_opts.lda, re_opts.seed)}};
    hitr::ReestimationConfig config =
        to_reestimation_config(re_opts.stages, re_opts.parsimony, re_opts.lda);

    hitr::PipelineResult result;
    bool from_corpus =
        hitr::variant_has_dr(variant) || variant == hitr::PipelineVariant::kLda;
    if (from_corpus) {
      if (re_opts.corpus.empty()) {
        throw CLI::RequiredError("--corpus (variant '" + re_opts.variant +
                                 "' trains from the corpus)");
      }
      if (!re_opts.model.empty()) {
        hitr::log_warn("--model is ignored when the variant retrains");
      }
      ctx.inputs = {re_opts.corpus};
      hitr::Corpus corpus = hitr::io::load_corpus(re_opts.corpus);
      result = hitr::run_pipeline(corpus, variant, config, re_opts.seed);
    } else {
      if (re_opts.model.empty()) {
        throw CLI::RequiredError("--model (variant '" + re_opts.variant +
                                 "' re-estimates a trained model)");
      }
      if (hitr::variant_has_tr(variant) && re_opts.corpus.empty()) {
        throw CLI::RequiredError(
            "--corpus (topic re-estimation re-assigns topics to documents)");
      }
      ctx.inputs = {re_opts.model};
      hitr::TopicModel model = hitr::io::load_model(re_opts.model);
      std::optional<hitr::Corpus> corpus;
      if (!re_opts.corpus.empty()) {
        corpus = hitr::io::load_corpus(re_opts.corpus);
        ctx.inputs.push_back(re_opts.corpus);
      }
      result = hitr::continue_pipeline(
          model, corpus.has_value() ? &*corpus : nullptr, variant, config,
          re_opts.seed);
    }
    hitr::io::save_model(result.model, re_opts.output);
    ctx.config["stage_timings_ms"] = timings_json(result.model.provenance);
    ctx.outputs = {re_opts.output};
    ctx.finish(re_opts.output);
  });

  // ---- diversity -------------------------------------------------------
  auto* diversity = app.add_subcommand(
      "diversity", "Score documents by Rao diversity over model topics");
  struct {
    std::string model, corpus, output, distances;
    ParsimonyOpts parsimony;
    StageOpts stages;
    std::vector<double> lambda_tar;
    std::uint64_t seed = 1;
  } div_opts;
  diversity->add_option("--model", div_opts.model, "Trained model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  diversity
      ->add_option("--corpus", div_opts.corpus,
                   "Documents to score (default: the model's own)")
      ->check(CLI::ExistingFile);
  diversity->add_option("--output", div_opts.output, "Scores CSV")
      ->required();
  diversity->add_option("--distances", div_opts.distances,
                        "Also export the topic distance matrix CSV");
  diversity
      ->add_option("--lambda-tar", div_opts.lambda_tar,
                   "Re-estimate topic assignments before scoring")
      ->expected(0, 1);
  add_parsimony_options(diversity, div_opts.parsimony);
  add_stage_options(diversity, div_opts.stages, /*with_lambdas=*/false);
  diversity->add_option("--seed", div_opts.seed, "Run seed")
      ->capture_default_str();
  diversity->callback([&] {
    hitr::set_max_jobs(jobs);
    RunContext ctx;
    ctx.command = "diversity";
    ctx.seed = div_opts.seed;
    ctx.inputs = {div_opts.model};
    std::optional<double> lambda_tar;
    if (!div_opts.lambda_tar.empty()) lambda_tar = div_opts.lambda_tar.front();
    ctx.config = {{"lambda_tar", lambda_tar.has_value() ? json(*lambda_tar)
                                                        : json(nullptr)},
                  {"fold_in_iters", div_opts.stages.fold_in_iters},
                  {"parsimony", parsimony_config_json(div_opts.parsimony)}};

    hitr::TopicModel model = hitr::io::load_model(div_opts.model);
    hitr::ReestimationConfig config;
    config.parsimony = to_parsimony_config(div_opts.parsimony);
    config.background_smoothing_epsilon = div_opts.stages.bg_epsilon;
    config.fold_in_iterations = div_opts.stages.fold_in_iters;

    hitr::DocumentTopicMatrix matrix;
    if (!div_opts.corpus.empty()) {
      ctx.inputs.push_back(div_opts.corpus);
      hitr::Corpus corpus = hitr::io::load_corpus(div_opts.corpus);
      matrix = hitr::infer_topics(model, corpus, config, lambda_tar,
                                  div_opts.seed);
    } else {
      matrix.doc_ids = model.doc_ids;
      matrix.rows = model.theta;
      if (lambda_tar.has_value()) {
        matrix = hitr::assignment_reestimate(
            matrix, *lambda_tar, config.parsimony,
            config.background_smoothing_epsilon);
      }
    }

    std::vector<double> scores = hitr::diversity_scores(model, matrix.rows);
    hitr::io::write_scores_csv(div_opts.output, matrix.doc_ids, scores);
    ctx.outputs = {div_opts.output};
    if (!div_opts.distances.empty()) {
      hitr::io::write_distance_csv(div_opts.distances,
                                   hitr::topic_distance_matrix(model.phi));
      ctx.outputs.push_back(div_opts.distances);
    }
    ctx.finish(div_opts.output);
  });

  // ---- gen-synthetic ---------------------------------------------------
  auto* gen = app.add_subcommand(
      "gen-synthetic",
      "Build a labeled diverse/non-diverse benchmark from a grouped corpus");
  struct {
    std::string corpus, output;
    SyntheticOpts synthetic;
    std::uint64_t seed = 1;
  } gen_opts;
  gen->add_option("--corpus", gen_opts.corpus, "Grouped corpus JSON")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--output", gen_opts.output, "Labeled corpus JSON")
      ->required();
  add_synthetic_options(gen, gen_opts.synthetic);
  gen->add_option("--seed", gen_opts.seed, "Sampling seed")
      ->capture_default_str();
  gen->callback([&] {
    RunContext ctx;
    ctx.command = "gen-synthetic";
    ctx.seed = gen_opts.seed;
    ctx.inputs = {gen_opts.corpus};
    hitr::Corpus corpus = hitr::io::load_corpus(gen_opts.corpus);
    hitr::SyntheticSpec spec =
        to_synthetic_spec(gen_opts.synthetic, corpus, gen_opts.seed);
    json pairs = json::array();
    for (const auto& [a, b] : spec.group_pairs) {
      pairs.push_back(a + ":" + b);
    }
    ctx.config = {{"pairs", pairs},
                  {"nondiverse_groups", spec.nondiverse_groups},
                  {"docs_per_pair", spec.docs_per_pair},
                  {"docs_per_group", spec.docs_per_group}};
    hitr::Corpus benchmark = hitr::generate_diversity_dataset(corpus, spec);
    hitr::io::save_corpus(benchmark, gen_opts.output);
    ctx.outputs = {gen_opts.output};
    ctx.finish(gen_opts.output);
  });

  // ---- eval ------------------------------------------------------------
  auto* eval = app.add_subcommand(
      "eval", "Evaluate scores or models: auc, coherence, cluster, features");
  struct {
    std::string mode, scores, labels, model, reference, gold, output;
    std::uint32_t top_n = 10;
  } eval_opts;
  eval->add_option("--mode", eval_opts.mode, "auc, coherence, cluster or features")
      ->required()
      ->check(CLI::IsMember({"auc", "coherence", "cluster", "features"}));
  eval->add_option("--scores", eval_opts.scores, "Scores CSV (auc mode)")
      ->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_opts.labels,
                   "Labeled corpus JSON (auc/features modes)")
      ->check(CLI::ExistingFile);
  eval->add_option("--model", eval_opts.model,
                   "Model JSON (coherence/cluster/features modes)")
      ->check(CLI::ExistingFile);
  eval->add_option("--reference", eval_opts.reference,
                   "Reference corpus for co-occurrence statistics")
      ->check(CLI::ExistingFile);
  eval->add_option("--gold", eval_opts.gold,
                   "Labeled corpus with gold classes (cluster mode)")
      ->check(CLI::ExistingFile);
  eval->add_option("--top-n", eval_opts.top_n, "Top words per topic")
      ->capture_default_str();
  eval->add_option("--output", eval_opts.output, "Report CSV")->required();
  eval->callback([&] {
    hitr::set_max_jobs(jobs);
    RunContext ctx;
    ctx.command = "eval";
    ctx.config = {{"mode", eval_opts.mode}, {"top_n", eval_opts.top_n}};
    auto require = [](const std::string& value, const char* flag) {
      if (value.empty()) throw CLI::RequiredError(flag);
    };

    if (eval_opts.mode == "auc") {
      require(eval_opts.scores, "--scores");
      require(eval_opts.labels, "--labels");
      ctx.inputs = {eval_opts.scores, eval_opts.labels};
      auto scores = read_scores_csv(eval_opts.scores);
      hitr::Corpus labeled = hitr::io::load_corpus(eval_opts.labels);
      hitr::RocResult roc =
          hitr::roc_auc(scores_against_labels(scores, labeled));
      hitr::io::write_roc_csv(eval_opts.output, roc);
      std::cout << "auc=" << hitr::io::format_double(roc.auc) << "\n";
    } else if (eval_opts.mode == "coherence") {
      require(eval_opts.model, "--model");
      require(eval_opts.reference, "--reference");
      ctx.inputs = {eval_opts.model, eval_opts.reference};
      hitr::TopicModel model = hitr::io::load_model(eval_opts.model);
      hitr::Corpus reference = hitr::io::load_corpus(eval_opts.reference);
      hitr::CoherenceReport report =
          hitr::npmi_coherence(model, eval_opts.top_n, reference);
      hitr::io::write_coherence_csv(eval_opts.output, report);
      std::cout << "mean_npmi=" << hitr::io::format_double(report.mean)
                << "\n";
    } else if (eval_opts.mode == "cluster") {
      require(eval_opts.model, "--model");
      require(eval_opts.gold, "--gold");
      ctx.inputs = {eval_opts.model, eval_opts.gold};
      hitr::TopicModel model = hitr::io::load_model(eval_opts.model);
      hitr::Corpus gold = hitr::io::load_corpus(eval_opts.gold);
      std::unordered_map<std::string, std::string> gold_of;
      for (const auto& doc : gold.documents) {
        // Gold class: the explicit label when present, the group otherwise.
        const std::string& cls =
            doc.class_label.empty() ? doc.group : doc.class_label;
        if (cls.empty()) {
          throw hitr::DataError("document '" + doc.id +
                                "' carries neither label nor group");
        }
        gold_of[doc.id] = cls;
      }
      std::vector<std::string> classes;
      for (const auto& id : model.doc_ids) {
        auto it = gold_of.find(id);
        if (it == gold_of.end()) {
          throw hitr::DataError("no gold class for document '" + id + "'");
        }
        classes.push_back(it->second);
      }
      std::vector<std::uint32_t> clusters = hitr::hard_clusters(model.theta);
      std::vector<std::uint32_t> class_ids = hitr::dense_labels(classes);
      double purity = hitr::clustering_purity(clusters, class_ids);
      double nmi = hitr::normalized_mutual_information(clusters, class_ids);
      hitr::io::write_text_file(
          eval_opts.output, "metric,value\npurity," +
                                hitr::io::format_double(purity) + "\nnmi," +
                                hitr::io::format_double(nmi) + "\n");
      std::cout << "purity=" << hitr::io::format_double(purity)
                << " nmi=" << hitr::io::format_double(nmi) << "\n";
    } else {  // features
      require(eval_opts.model, "--model");
      ctx.inputs = {eval_opts.model};
      hitr::TopicModel model = hitr::io::load_model(eval_opts.model);
      std::vector<std::string> labels(model.doc_ids.size());
      if (!eval_opts.labels.empty()) {
        ctx.inputs.push_back(eval_opts.labels);
        hitr::Corpus labeled = hitr::io::load_corpus(eval_opts.labels);
        std::unordered_map<std::string, std::string> label_of;
        for (const auto& doc : labeled.documents) {
          label_of[doc.id] =
              doc.class_label.empty() ? doc.group : doc.class_label;
        }
        for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
          auto it = label_of.find(model.doc_ids[d]);
          if (it != label_of.end()) labels[d] = it->second;
        }
      }
      hitr::DocumentTopicMatrix matrix;
      matrix.doc_ids = model.doc_ids;
      matrix.rows = model.theta;
      hitr::io::write_features_csv(eval_opts.output, matrix, labels,
                                   model.num_topics());
    }
    ctx.outputs = {eval_opts.output};
    ctx.finish(eval_opts.output);
  });

  // ---- sweep -----------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "Grid-search one stage's lambda by diversity AUC");
  struct {
    std::string corpus, stage, grid, output;
    LdaOpts lda;
    ParsimonyOpts parsimony;
    StageOpts stages;
    SyntheticOpts synthetic;
    std::uint64_t seed = 1;
  } sweep_opts;
  sweep->add_option("--corpus", sweep_opts.corpus, "Grouped training corpus")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--stage", sweep_opts.stage, "dr, tr or tar")
      ->required()
      ->check(CLI::IsMember({"dr", "tr", "tar"}));
  sweep->add_option("--grid", sweep_opts.grid, "Comma-separated lambdas")
      ->required();
  sweep->add_option("--output", sweep_opts.output, "Sweep CSV")->required();
  add_lda_options(sweep, sweep_opts.lda);
  add_parsimony_options(sweep, sweep_opts.parsimony);
  add_stage_options(sweep, sweep_opts.stages, /*with_lambdas=*/true);
  add_synthetic_options(sweep, sweep_opts.synthetic);
  sweep->add_option("--seed", sweep_opts.seed, "Run seed")
      ->capture_default_str();
  sweep->callback([&] {
    hitr::set_max_jobs(jobs);
    RunContext ctx;
    ctx.command = "sweep";
    ctx.seed = sweep_opts.seed;
    ctx.inputs = {sweep_opts.corpus};

    std::vector<double> grid;
    {
      std::size_t pos = 0;
      while (pos <= sweep_opts.grid.size()) {
        std::size_t comma = sweep_opts.grid.find(',', pos);
        if (comma == std::string::npos) comma = sweep_opts.grid.size();
        std::string cell = sweep_opts.grid.substr(pos, comma - pos);
        char* end = nullptr;
        double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size()) {
          throw hitr::DataError("--grid expects comma-separated numbers, got '" +
                                cell + "'");
        }
        grid.push_back(v);
        pos = comma + 1;
      }
    }

    hitr::Corpus corpus = hitr::io::load_corpus(sweep_opts.corpus);
    hitr::SyntheticSpec spec =
        to_synthetic_spec(sweep_opts.synthetic, corpus, sweep_opts.seed);
    hitr::ReestimationConfig config = to_reestimation_config(
        sweep_opts.stages, sweep_opts.parsimony, sweep_opts.lda);
    ctx.config = {{"stage", sweep_opts.stage},
                  {"grid", grid},
                  {"lda", lda_config_json(sweep_opts.lda, sweep_opts.seed)},
                  {"parsimony", parsimony_config_json(sweep_opts.parsimony)}};

    auto rows = hitr::lambda_sweep(
        corpus, hitr::variant_from_string(sweep_opts.stage), grid, config,
        spec, sweep_opts.seed);
    hitr::io::write_sweep_csv(sweep_opts.output, rows);
    for (const auto& [lambda, auc] : rows) {
      std::cout << "lambda=" << hitr::io::format_double(lambda)
                << " auc=" << hitr::io::format_double(auc) << "\n";
    }
    ctx.outputs = {sweep_opts.output};
    ctx.finish(sweep_opts.output);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const hitr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
