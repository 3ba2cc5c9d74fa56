#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hitr/corpus.hpp"
#include "hitr/lda.hpp"
#include "hitr/pipeline.hpp"

namespace hitr {

struct LabeledScore {
  std::string doc_id;
  double score = 0.0;
  int label = 0;  // 1 = diverse, 0 = non-diverse
};

// Class labels carried on synthetic documents.
inline constexpr const char* kDiverseLabel = "diverse";
inline constexpr const char* kNonDiverseLabel = "non-diverse";

// Maps the labels above to 1/0. Throws DataError on anything else.
int binary_label(const std::string& class_label);

struct SyntheticSpec {
  std::vector<std::pair<std::string, std::string>> group_pairs;
  std::uint32_t docs_per_pair = 50;
  std::vector<std::string> nondiverse_groups;
  std::uint32_t docs_per_group = 25;
  std::uint64_t seed = 1;

  void validate() const;
};

// Builds a labeled benchmark corpus of pseudo-documents. Diverse documents
// combine one document from each group of a pair; non-diverse documents
// combine two documents from the same group. Combination sums the two
// word-count vectors and floor-halves each entry. Sampling is without
// replacement within each pair/group batch and deterministic given the
// spec's seed. The vocabulary is carried over from the source corpus with
// frequencies recomputed. Throws DataError when a group runs out of
// documents.
Corpus generate_diversity_dataset(const Corpus& corpus,
                                  const SyntheticSpec& spec);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> points;  // starts (0,0), ends (1,1)
};

// Rank-statistic AUC (ties count 0.5) plus the ROC curve swept over every
// distinct score (rule: score >= threshold is called diverse; the leading
// (0,0) point carries threshold = +inf). Throws DataError unless both
// labels are present.
RocResult roc_auc(const std::vector<LabeledScore>& scores);

struct CoherenceReport {
  std::vector<double> per_topic;
  double mean = 0.0;
};

// Topic coherence as summed NPMI over the unordered pairs of each topic's
// top_n most probable words (ties broken toward the lower word id), with
// probabilities taken from document occurrence counts in `reference`.
// Pairs that never co-occur score -1; pairs that co-occur in every document
// score 1. Throws DataError when a top word is absent from the reference.
CoherenceReport npmi_coherence(const TopicModel& model, std::uint32_t top_n,
                               const Corpus& reference);

// Argmax cluster per row, ties toward the lower topic id.
std::vector<std::uint32_t> hard_clusters(
    const std::vector<SparseDistribution>& rows);

// Maps arbitrary string labels to dense ids in first-occurrence order.
std::vector<std::uint32_t> dense_labels(const std::vector<std::string>& labels);

// Fraction of documents whose cluster's majority class they belong to.
double clustering_purity(const std::vector<std::uint32_t>& clusters,
                         const std::vector<std::uint32_t>& classes);

// 2 * I(a;b) / (H(a) + H(b)); 1 when both entropies are zero, 0 when
// exactly one is. Symmetric.
double normalized_mutual_information(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b);

// Fold documents into a trained model, mapping their tokens onto the model
// vocabulary first (words the model does not know are dropped). When
// lambda_tar is set the resulting rows are additionally re-estimated
// against their own collection-wide average. Deterministic given seed.
DocumentTopicMatrix infer_topics(const TopicModel& model, const Corpus& docs,
                                 const ReestimationConfig& config,
                                 std::optional<double> lambda_tar,
                                 std::uint64_t seed);

// Rao diversity of each row against the pairwise angular distances of the
// model's topics.
std::vector<double> diversity_scores(const TopicModel& model,
                                     const std::vector<SparseDistribution>& rows);

// Runs one re-estimation stage (dr, tr or tar) across a lambda grid with a
// fixed pipeline seed, scoring each run by diversity AUC on a synthetic
// benchmark generated from `training`. Returns one (lambda, auc) row per
// grid point, in grid order. Grid points run job-parallel. Stages that do
// not touch training (tr, tar) reuse one base model across the grid.
std::vector<std::pair<double, double>> lambda_sweep(
    const Corpus& training, PipelineVariant stage,
    const std::vector<double>& grid, const ReestimationConfig& base,
    const SyntheticSpec& synthetic, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

// Shuffled k-fold splits over [0, num_items): fold i is the test slice,
// fold (i+1) mod k the dev slice, the rest training.
std::vector<FoldSplit> kfold_splits(std::size_t num_items,
                                    std::uint32_t num_folds,
                                    std::uint64_t seed);

}  // namespace hitr
