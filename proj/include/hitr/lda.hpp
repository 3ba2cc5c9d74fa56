#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hitr/corpus.hpp"
#include "hitr/sparse_distribution.hpp"

namespace hitr {

struct LdaConfig {
  std::uint32_t num_topics = 100;
  double alpha = 0.0;  // <= 0 selects 1/num_topics
  double beta = 0.01;
  std::uint32_t train_iterations = 1000;
  std::uint32_t burn_in = 800;
  // Point estimates come from the counts of the last `average_sweeps`
  // sweeps (1 = final sweep only). Must fit after burn-in.
  std::uint32_t average_sweeps = 1;
  std::uint64_t seed = 1;

  double resolved_alpha() const;
  void validate() const;  // throws DataError
};

// Where a model came from: pipeline variant, the lambdas of the stages that
// ran, the seed, and per-stage wall-clock timings.
struct Provenance {
  std::string variant = "lda";
  std::optional<double> lambda_dr;
  std::optional<double> lambda_tr;
  std::optional<double> lambda_tar;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> stage_timings_ms;
};

// Trained topic model: per-topic word distributions P(w|t) and per-document
// topic distributions P(t|d). Every row sums to 1 within 1e-6; fresh from
// training both are dense (smoothing makes every entry positive), after
// re-estimation rows become sparse.
struct TopicModel {
  LdaConfig config;
  std::vector<std::string> vocab;  // token strings in word-id order
  std::vector<std::string> doc_ids;
  std::vector<SparseDistribution> phi;    // [topic] -> P(w|t)
  std::vector<SparseDistribution> theta;  // [doc]   -> P(t|d)
  Provenance provenance;

  std::uint32_t num_topics() const { return static_cast<std::uint32_t>(phi.size()); }
  std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(vocab.size()); }
};

// Collapsed Gibbs training. Point estimates use the smoothed count ratios
//   phi[t][w]   = (n_tw + beta)  / (n_t + |V| beta)
//   theta[d][t] = (n_dt + alpha) / (|d| + T alpha)
// with counts taken from the final sweep (or averaged over the last
// config.average_sweeps sweeps). Deterministic given config.seed.
// Throws DataError on an empty corpus or empty documents.
TopicModel train(const Corpus& corpus, const LdaConfig& config);

// Fold-in inference of P(t|d) with phi held fixed: per document, token-topic
// assignments are Gibbs-sampled under the model's phi and alpha. Documents
// are conditionally independent given phi, so this runs document-parallel
// with per-document derived seeds; results equal the serial run.
//
// Tokens whose word has zero probability in every topic (possible after
// topic re-estimation pruned it everywhere) are skipped and contribute
// nothing. Throws DataError on word ids outside the model's vocabulary.
std::vector<SparseDistribution> fold_in(const TopicModel& model,
                                        const Corpus& corpus,
                                        std::uint32_t iterations,
                                        std::uint64_t seed);

}  // namespace hitr
