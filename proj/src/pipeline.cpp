#include "hitr/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <unordered_map>

#include "hitr/errors.hpp"
#include "hitr/log.hpp"
#include "hitr/parallel.hpp"
#include "hitr/rand.hpp"

namespace hitr {

bool variant_has_dr(PipelineVariant v) {
  return v == PipelineVariant::kLdaDr || v == PipelineVariant::kLdaDrTr ||
         v == PipelineVariant::kLdaDrTar || v == PipelineVariant::kHitr;
}

bool variant_has_tr(PipelineVariant v) {
  return v == PipelineVariant::kLdaTr || v == PipelineVariant::kLdaDrTr ||
         v == PipelineVariant::kLdaTrTar || v == PipelineVariant::kHitr;
}

bool variant_has_tar(PipelineVariant v) {
  return v == PipelineVariant::kLdaTar || v == PipelineVariant::kLdaDrTar ||
         v == PipelineVariant::kLdaTrTar || v == PipelineVariant::kHitr;
}

std::string to_string(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::kLda: return "lda";
    case PipelineVariant::kLdaDr: return "dr";
    case PipelineVariant::kLdaTr: return "tr";
    case PipelineVariant::kLdaTar: return "tar";
    case PipelineVariant::kLdaDrTr: return "dr+tr";
    case PipelineVariant::kLdaDrTar: return "dr+tar";
    case PipelineVariant::kLdaTrTar: return "tr+tar";
    case PipelineVariant::kHitr: return "hitr";
  }
  throw DataError("unknown pipeline variant");
}

PipelineVariant variant_from_string(const std::string& name) {
  for (PipelineVariant v : all_variants()) {
    if (to_string(v) == name) return v;
  }
  throw DataError("unknown variant '" + name +
                  "' (expected lda, dr, tr, tar, dr+tr, dr+tar, tr+tar or "
                  "hitr)");
}

const std::vector<PipelineVariant>& all_variants() {
  static const std::vector<PipelineVariant> variants = {
      PipelineVariant::kLda,      PipelineVariant::kLdaDr,
      PipelineVariant::kLdaTr,    PipelineVariant::kLdaTar,
      PipelineVariant::kLdaDrTr,  PipelineVariant::kLdaDrTar,
      PipelineVariant::kLdaTrTar, PipelineVariant::kHitr};
  return variants;
}

void ReestimationConfig::validate() const {
  auto check_lambda = [](double value, const char* name) {
    if (!(value > 0.0) || value > 1.0) {
      throw DataError(std::string(name) + " must be in (0, 1]");
    }
  };
  check_lambda(lambda_dr, "lambda_dr");
  check_lambda(lambda_tr, "lambda_tr");
  check_lambda(lambda_tar, "lambda_tar");
  parsimony.validate();
  lda.validate();
  if (background_smoothing_epsilon < 0.0) {
    throw DataError("background_smoothing_epsilon must be nonnegative");
  }
  if (fold_in_iterations == 0) {
    throw DataError("fold_in_iterations must be positive");
  }
}

std::vector<std::pair<WordId, std::uint32_t>> floored_counts(
    const SparseDistribution& dist, std::uint64_t length) {
  std::vector<std::pair<WordId, std::uint32_t>> counts;
  counts.reserve(dist.support_size());
  for (const auto& [w, p] : dist.entries()) {
    // The nudge keeps floor exact when p is a ratio tf/length: the product
    // can land a few ulps under the integer it equals in exact arithmetic.
    auto c = static_cast<std::uint64_t>(
        std::floor(p * static_cast<double>(length) + 1e-9));
    if (c > 0) counts.emplace_back(w, static_cast<std::uint32_t>(c));
  }
  return counts;
}

Corpus document_reestimate(const Corpus& corpus, double lambda_dr,
                           const ParsimonyConfig& parsimony) {
  if (corpus.documents.empty()) {
    throw DataError("corpus has no documents");
  }
  if (lambda_dr == 1.0) return corpus;

  ParsimonyConfig config = parsimony;
  config.lambda = lambda_dr;
  const SparseDistribution background = collection_language_model(corpus);

  const std::size_t D = corpus.documents.size();
  std::vector<std::vector<std::pair<WordId, std::uint32_t>>> rewritten(D);
  parallel_for(D, [&](std::size_t d) {
    const Document& doc = corpus.documents[d];
    MassVector mass;
    mass.reserve(doc.counts.size());
    for (const auto& [wid, count] : doc.counts) {
      mass.emplace_back(wid, static_cast<double>(count));
    }
    try {
      SparseDistribution specific = parsimonize(mass, background, config);
      rewritten[d] = floored_counts(specific, doc.length);
    } catch (const DataError& e) {
      throw DataError("document '" + doc.id + "': " + e.what());
    }
  });

  // Words that vanished from every document leave the vocabulary; ids are
  // reassigned densely, preserving the old order.
  const std::size_t old_V = corpus.vocabulary.size();
  std::vector<char> word_used(old_V, 0);
  for (const auto& counts : rewritten) {
    for (const auto& [wid, count] : counts) word_used[wid] = 1;
  }

  Corpus out;
  out.preprocess_log = corpus.preprocess_log;
  std::vector<WordId> remap(old_V, 0);
  auto& vocab = out.vocabulary;
  for (WordId w = 0; w < old_V; ++w) {
    if (word_used[w]) {
      remap[w] = static_cast<WordId>(vocab.words.size());
      vocab.index.emplace(corpus.vocabulary.words[w],
                          static_cast<WordId>(vocab.words.size()));
      vocab.words.push_back(corpus.vocabulary.words[w]);
    } else if (corpus.vocabulary.collection_frequency[w] > 0) {
      out.preprocess_log.removed_reestimation.push_back(
          corpus.vocabulary.words[w]);
    }
  }
  vocab.doc_frequency.assign(vocab.size(), 0);
  vocab.collection_frequency.assign(vocab.size(), 0);

  for (std::size_t d = 0; d < D; ++d) {
    if (rewritten[d].empty()) {
      out.preprocess_log.dropped_documents.push_back(corpus.documents[d].id);
      continue;
    }
    Document doc;
    doc.id = corpus.documents[d].id;
    doc.group = corpus.documents[d].group;
    doc.class_label = corpus.documents[d].class_label;
    for (const auto& [wid, count] : rewritten[d]) {
      WordId nw = remap[wid];
      doc.counts.emplace_back(nw, count);
      doc.length += count;
      vocab.doc_frequency[nw] += 1;
      vocab.collection_frequency[nw] += count;
    }
    out.documents.push_back(std::move(doc));
  }

  if (out.documents.empty()) {
    throw DataError("re-estimation emptied every document");
  }
  if (out.documents.size() < D) {
    log_info("document re-estimation dropped " +
             std::to_string(D - out.documents.size()) + " documents");
  }
  return out;
}

TopicModel topic_reestimate(const TopicModel& model, const Corpus& corpus,
                            double lambda_tr, const ParsimonyConfig& parsimony,
                            double background_smoothing_epsilon,
                            std::uint32_t fold_in_iterations,
                            std::uint64_t fold_in_seed) {
  if (model.num_topics() < 2) {
    throw DataError("topic re-estimation needs at least 2 topics");
  }
  if (lambda_tr == 1.0) return model;

  ParsimonyConfig config = parsimony;
  config.lambda = lambda_tr;
  const SparseDistribution background =
      average_background(model.phi, background_smoothing_epsilon);

  TopicModel out = model;
  parallel_for(model.phi.size(), [&](std::size_t t) {
    try {
      out.phi[t] = parsimonize(model.phi[t].entries(), background, config);
    } catch (const DataError& e) {
      throw DataError("topic " + std::to_string(t) + ": " + e.what());
    }
  });

  out.doc_ids.clear();
  for (const auto& doc : corpus.documents) out.doc_ids.push_back(doc.id);
  out.theta = fold_in(out, corpus, fold_in_iterations, fold_in_seed);
  return out;
}

DocumentTopicMatrix assignment_reestimate(const DocumentTopicMatrix& theta,
                                          double lambda_tar,
                                          const ParsimonyConfig& parsimony,
                                          double background_smoothing_epsilon) {
  if (theta.rows.empty()) {
    throw DataError("no topic assignments to re-estimate");
  }
  if (lambda_tar == 1.0) return theta;

  ParsimonyConfig config = parsimony;
  config.lambda = lambda_tar;
  const SparseDistribution background =
      average_background(theta.rows, background_smoothing_epsilon);

  DocumentTopicMatrix out = theta;
  parallel_for(theta.rows.size(), [&](std::size_t d) {
    try {
      out.rows[d] = parsimonize(theta.rows[d].entries(), background, config);
    } catch (const DataError& e) {
      throw DataError("document '" + theta.doc_ids[d] + "': " + e.what());
    }
  });
  return out;
}

PipelineResult run_pipeline(const Corpus& corpus, PipelineVariant variant,
                            const ReestimationConfig& config,
                            std::uint64_t seed) {
  config.validate();
  using Clock = std::chrono::steady_clock;

  Provenance provenance;
  provenance.variant = to_string(variant);
  provenance.seed = seed;
  if (variant_has_dr(variant)) provenance.lambda_dr = config.lambda_dr;
  if (variant_has_tr(variant)) provenance.lambda_tr = config.lambda_tr;
  if (variant_has_tar(variant)) provenance.lambda_tar = config.lambda_tar;

  auto run_stage = [&](const char* name, const std::function<void()>& stage) {
    auto t0 = Clock::now();
    try {
      stage();
    } catch (const DataError& e) {
      throw DataError(std::string(name) + ": " + e.what());
    }
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    provenance.stage_timings_ms.emplace_back(name, ms);
    log_debug(std::string(name) + " took " + std::to_string(ms) + " ms");
  };

  PipelineResult result;
  result.working_corpus = corpus;

  if (variant_has_dr(variant)) {
    run_stage("document re-estimation", [&] {
      result.working_corpus = document_reestimate(
          result.working_corpus, config.lambda_dr, config.parsimony);
    });
  }

  LdaConfig lda_config = config.lda;
  lda_config.seed = derive_seed(seed, 1);
  run_stage("training", [&] {
    result.model = train(result.working_corpus, lda_config);
  });

  if (variant_has_tr(variant)) {
    run_stage("topic re-estimation", [&] {
      result.model = topic_reestimate(
          result.model, result.working_corpus, config.lambda_tr,
          config.parsimony, config.background_smoothing_epsilon,
          config.fold_in_iterations, derive_seed(seed, 2));
    });
  }

  DocumentTopicMatrix matrix;
  matrix.doc_ids = result.model.doc_ids;
  matrix.rows = result.model.theta;
  if (variant_has_tar(variant)) {
    run_stage("topic-assignment re-estimation", [&] {
      matrix = assignment_reestimate(matrix, config.lambda_tar,
                                     config.parsimony,
                                     config.background_smoothing_epsilon);
    });
  }

  result.model.theta = matrix.rows;
  result.model.provenance = provenance;
  matrix.provenance = provenance;
  result.assignments = std::move(matrix);
  return result;
}

PipelineVariant variant_from_stages(bool dr, bool tr, bool tar) {
  for (PipelineVariant v : all_variants()) {
    if (variant_has_dr(v) == dr && variant_has_tr(v) == tr &&
        variant_has_tar(v) == tar) {
      return v;
    }
  }
  return PipelineVariant::kLda;  // dr/tr/tar cover all 8 combinations
}

PipelineResult continue_pipeline(const TopicModel& model, const Corpus* corpus,
                                 PipelineVariant variant,
                                 const ReestimationConfig& config,
                                 std::uint64_t seed) {
  config.validate();
  if (variant_has_dr(variant)) {
    throw DataError("variant '" + to_string(variant) +
                    "' rewrites the corpus before training; run it from a "
                    "corpus, not a trained model");
  }
  if (variant_has_tr(variant) && corpus == nullptr) {
    throw DataError("topic re-estimation needs the corpus to re-assign "
                    "topics to documents");
  }
  using Clock = std::chrono::steady_clock;

  // The stage union keeps provenance honest when stages are applied to an
  // already re-estimated model.
  PipelineVariant history = variant_from_string(model.provenance.variant);
  Provenance provenance = model.provenance;
  provenance.variant = to_string(variant_from_stages(
      variant_has_dr(history),
      variant_has_tr(history) || variant_has_tr(variant),
      variant_has_tar(history) || variant_has_tar(variant)));
  provenance.seed = seed;
  if (variant_has_tr(variant)) provenance.lambda_tr = config.lambda_tr;
  if (variant_has_tar(variant)) provenance.lambda_tar = config.lambda_tar;

  auto run_stage = [&](const char* name, const std::function<void()>& stage) {
    auto t0 = Clock::now();
    try {
      stage();
    } catch (const DataError& e) {
      throw DataError(std::string(name) + ": " + e.what());
    }
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    provenance.stage_timings_ms.emplace_back(name, ms);
  };

  PipelineResult result;
  result.model = model;
  if (corpus != nullptr) {
    result.working_corpus = translate_corpus(*corpus, model.vocab);
  }

  if (variant_has_tr(variant)) {
    run_stage("topic re-estimation", [&] {
      result.model = topic_reestimate(
          result.model, result.working_corpus, config.lambda_tr,
          config.parsimony, config.background_smoothing_epsilon,
          config.fold_in_iterations, derive_seed(seed, 2));
    });
  }

  DocumentTopicMatrix matrix;
  matrix.doc_ids = result.model.doc_ids;
  matrix.rows = result.model.theta;
  if (variant_has_tar(variant)) {
    run_stage("topic-assignment re-estimation", [&] {
      matrix = assignment_reestimate(matrix, config.lambda_tar,
                                     config.parsimony,
                                     config.background_smoothing_epsilon);
    });
  }

  result.model.theta = matrix.rows;
  result.model.provenance = provenance;
  matrix.provenance = provenance;
  result.assignments = std::move(matrix);
  return result;
}

}  // namespace hitr
