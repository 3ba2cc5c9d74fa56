#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hitr/corpus.hpp"
#include "hitr/lda.hpp"
#include "hitr/parsimony.hpp"

namespace hitr {

// LDA baseline plus the seven re-estimation combinations. Stages always run
// in the fixed order DR -> train -> TR -> TAR; a variant simply omits the
// stages it does not name.
enum class PipelineVariant {
  kLda,
  kLdaDr,
  kLdaTr,
  kLdaTar,
  kLdaDrTr,
  kLdaDrTar,
  kLdaTrTar,
  kHitr,  // DR + TR + TAR
};

bool variant_has_dr(PipelineVariant v);
bool variant_has_tr(PipelineVariant v);
bool variant_has_tar(PipelineVariant v);

// CLI names: lda, dr, tr, tar, dr+tr, dr+tar, tr+tar, hitr.
std::string to_string(PipelineVariant v);
PipelineVariant variant_from_string(const std::string& name);
const std::vector<PipelineVariant>& all_variants();

struct ReestimationConfig {
  double lambda_dr = 0.4;
  double lambda_tr = 0.7;
  double lambda_tar = 0.03;
  ParsimonyConfig parsimony;
  LdaConfig lda;
  // Added to background items before normalization in TR/TAR so that no
  // foreground item can hit a zero background.
  double background_smoothing_epsilon = 1e-12;
  std::uint32_t fold_in_iterations = 50;

  void validate() const;
};

// Final per-document topic distributions plus where they came from.
struct DocumentTopicMatrix {
  std::vector<std::string> doc_ids;
  std::vector<SparseDistribution> rows;
  Provenance provenance;
};

// The count rewrite used by document re-estimation:
//   tf'(w) = floor(P(w) * length)
// evaluated with a 1e-9 nudge so that the exact-real identity
// floor((tf/|d|)*|d|) = tf survives floating point. Zero-count words are
// dropped.
std::vector<std::pair<WordId, std::uint32_t>> floored_counts(
    const SparseDistribution& dist, std::uint64_t length);

// DR: parsimonizes each document's word counts against the collection
// language model, rewrites counts via floored_counts (|d| = original
// length), drops emptied words and documents (logged), and rebuilds the
// vocabulary densely with frequencies recomputed. lambda 1 is the identity.
// Document-parallel. Throws DataError if every document empties.
Corpus document_reestimate(const Corpus& corpus, double lambda_dr,
                           const ParsimonyConfig& parsimony);

// TR: parsimonizes each topic's word distribution against the normalized
// average of all topic rows, then re-assigns topics to documents by folding
// the corpus in against the re-estimated phi. lambda 1 returns the model
// unchanged (no re-assignment). Topic-parallel. Throws DataError if a topic
// row prunes to empty.
TopicModel topic_reestimate(const TopicModel& model, const Corpus& corpus,
                            double lambda_tr, const ParsimonyConfig& parsimony,
                            double background_smoothing_epsilon,
                            std::uint32_t fold_in_iterations,
                            std::uint64_t fold_in_seed);

// TAR: parsimonizes each document's topic distribution against the
// collection-wide average topic distribution. lambda 1 is the identity.
// Document-parallel. Throws DataError if a row prunes to empty.
DocumentTopicMatrix assignment_reestimate(const DocumentTopicMatrix& theta,
                                          double lambda_tar,
                                          const ParsimonyConfig& parsimony,
                                          double background_smoothing_epsilon);

struct PipelineResult {
  TopicModel model;               // theta holds the final assignments
  DocumentTopicMatrix assignments;
  Corpus working_corpus;          // the corpus the model was trained on
};

// Runs the stages named by `variant` in the fixed order DR -> train LDA ->
// TR (with re-assignment) -> TAR. Deterministic given `seed` (stage seeds
// are derived from it). Stage errors are rethrown with the stage name
// attached.
PipelineResult run_pipeline(const Corpus& corpus, PipelineVariant variant,
                            const ReestimationConfig& config,
                            std::uint64_t seed);

PipelineVariant variant_from_stages(bool dr, bool tr, bool tar);

// Applies the post-training stages of `variant` (TR and/or TAR, same fixed
// order) to an already trained model. DR variants need retraining and are
// rejected. `corpus` feeds the re-assignment after TR and may be null for
// TAR-only runs; it is matched to the model vocabulary by token. The
// returned provenance unions the stages with the model's history.
PipelineResult continue_pipeline(const TopicModel& model, const Corpus* corpus,
                                 PipelineVariant variant,
                                 const ReestimationConfig& config,
                                 std::uint64_t seed);

}  // namespace hitr
