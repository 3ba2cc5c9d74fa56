#include "hitr/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "hitr/diversity.hpp"
#include "hitr/errors.hpp"
#include "hitr/parallel.hpp"
#include "hitr/rand.hpp"

namespace hitr {

int binary_label(const std::string& class_label) {
  if (class_label == kDiverseLabel) return 1;
  if (class_label == kNonDiverseLabel) return 0;
  throw DataError("unknown class label '" + class_label + "' (expected '" +
                  kDiverseLabel + "' or '" + kNonDiverseLabel + "')");
}

void SyntheticSpec::validate() const {
  if (group_pairs.empty() && nondiverse_groups.empty()) {
    throw DataError("synthetic spec names no group pairs and no groups");
  }
  if (docs_per_pair == 0 || docs_per_group == 0) {
    throw DataError("synthetic document counts must be positive");
  }
  for (const auto& [a, b] : group_pairs) {
    if (a == b) {
      throw DataError("group pair (" + a + ", " + b +
                      ") must name two different groups");
    }
  }
}

namespace {

// floor((counts_a + counts_b) / 2) over the union of both supports.
Document combine_documents(const Document& a, const Document& b,
                           std::string id, std::string group,
                           std::string label) {
  Document doc;
  doc.id = std::move(id);
  doc.group = std::move(group);
  doc.class_label = std::move(label);
  std::size_t i = 0, j = 0;
  auto push = [&doc](WordId w, std::uint64_t total) {
    std::uint32_t half = static_cast<std::uint32_t>(total / 2);
    if (half > 0) {
      doc.counts.emplace_back(w, half);
      doc.length += half;
    }
  };
  while (i < a.counts.size() || j < b.counts.size()) {
    if (j >= b.counts.size() ||
        (i < a.counts.size() && a.counts[i].first < b.counts[j].first)) {
      push(a.counts[i].first, a.counts[i].second);
      ++i;
    } else if (i >= a.counts.size() || b.counts[j].first < a.counts[i].first) {
      push(b.counts[j].first, b.counts[j].second);
      ++j;
    } else {
      push(a.counts[i].first,
           static_cast<std::uint64_t>(a.counts[i].second) + b.counts[j].second);
      ++i;
      ++j;
    }
  }
  if (doc.counts.empty()) {
    throw DataError("combining '" + a.id + "' and '" + b.id +
                    "' produced an empty document");
  }
  return doc;
}

// Batch of document indices for one group, shuffled by a dedicated stream.
std::vector<std::size_t> shuffled_batch(
    const std::unordered_map<std::string, std::vector<std::size_t>>& by_group,
    const std::string& group, std::uint64_t seed, std::uint64_t stream,
    std::size_t needed, const char* purpose) {
  auto it = by_group.find(group);
  if (it == by_group.end()) {
    throw DataError("group '" + group + "' does not exist in the corpus");
  }
  if (it->second.size() < needed) {
    throw DataError("group '" + group + "' has " +
                    std::to_string(it->second.size()) + " documents but " +
                    purpose + " needs " + std::to_string(needed));
  }
  std::vector<std::size_t> batch = it->second;
  std::mt19937_64 rng(derive_seed(seed, stream));
  shuffle_deterministic(batch, rng);
  batch.resize(needed);
  return batch;
}

}  // namespace

Corpus generate_diversity_dataset(const Corpus& corpus,
                                  const SyntheticSpec& spec) {
  spec.validate();

  std::unordered_map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& group = corpus.documents[d].group;
    if (!group.empty()) by_group[group].push_back(d);
  }

  Corpus out;
  out.vocabulary.words = corpus.vocabulary.words;
  out.vocabulary.index = corpus.vocabulary.index;

  std::uint64_t stream = 0;
  for (std::size_t p = 0; p < spec.group_pairs.size(); ++p) {
    const auto& [ga, gb] = spec.group_pairs[p];
    auto batch_a = shuffled_batch(by_group, ga, spec.seed, stream++,
                                  spec.docs_per_pair, "the pair batch");
    auto batch_b = shuffled_batch(by_group, gb, spec.seed, stream++,
                                  spec.docs_per_pair, "the pair batch");
    for (std::uint32_t k = 0; k < spec.docs_per_pair; ++k) {
      out.documents.push_back(combine_documents(
          corpus.documents[batch_a[k]], corpus.documents[batch_b[k]],
          kDiverseLabel + ("-" + ga + "+" + gb + "-" + std::to_string(k)),
          ga + "+" + gb, kDiverseLabel));
    }
  }
  for (std::size_t g = 0; g < spec.nondiverse_groups.size(); ++g) {
    const auto& group = spec.nondiverse_groups[g];
    auto batch = shuffled_batch(by_group, group, spec.seed, stream++,
                                2 * static_cast<std::size_t>(spec.docs_per_group),
                                "the group batch");
    for (std::uint32_t k = 0; k < spec.docs_per_group; ++k) {
      out.documents.push_back(combine_documents(
          corpus.documents[batch[2 * k]], corpus.documents[batch[2 * k + 1]],
          kNonDiverseLabel + ("-" + group + "-" + std::to_string(k)), group,
          kNonDiverseLabel));
    }
  }

  auto& vocab = out.vocabulary;
  vocab.doc_frequency.assign(vocab.size(), 0);
  vocab.collection_frequency.assign(vocab.size(), 0);
  for (const auto& doc : out.documents) {
    for (const auto& [wid, count] : doc.counts) {
      vocab.doc_frequency[wid] += 1;
      vocab.collection_frequency[wid] += count;
    }
  }
  return out;
}

RocResult roc_auc(const std::vector<LabeledScore>& scores) {
  std::size_t positives = 0, negatives = 0;
  for (const auto& s : scores) {
    if (s.label == 1) {
      ++positives;
    } else if (s.label == 0) {
      ++negatives;
    } else {
      throw DataError("labels must be 0 or 1");
    }
  }
  if (positives == 0 || negatives == 0) {
    throw DataError("AUC needs at least one example of each class");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].score < scores[b].score;
  });

  // Mann-Whitney with midranks for ties.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() &&
           scores[order[j]].score == scores[order[i]].score) {
      ++j;
    }
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label == 1) positive_rank_sum += midrank;
    }
    i = j;
  }
  double p = static_cast<double>(positives);
  double n = static_cast<double>(negatives);
  double auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);

  // ROC sweep over distinct scores, descending; a document is called
  // diverse when score >= threshold.
  RocResult result;
  result.auc = auc;
  result.points.push_back(
      RocPoint{std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && scores[order[j - 1]].score == scores[order[i - 1]].score) {
      --j;
    }
    for (std::size_t k = j; k < i; ++k) {
      if (scores[order[k]].label == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    result.points.push_back(RocPoint{scores[order[j]].score,
                                     static_cast<double>(fp) / n,
                                     static_cast<double>(tp) / p});
    i = j;
  }
  return result;
}

CoherenceReport npmi_coherence(const TopicModel& model, std::uint32_t top_n,
                               const Corpus& reference) {
  if (top_n < 2) throw DataError("top_n must be at least 2");
  if (reference.documents.empty()) {
    throw DataError("reference corpus is empty");
  }
  const std::size_t N = reference.documents.size();

  // Top words per topic, most probable first; ties toward the lower id.
  std::vector<std::vector<WordId>> tops(model.num_topics());
  std::set<WordId> needed_model_ids;
  for (std::uint32_t t = 0; t < model.num_topics(); ++t) {
    MassVector entries = model.phi[t].entries();
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    std::size_t take = std::min<std::size_t>(top_n, entries.size());
    for (std::size_t i = 0; i < take; ++i) {
      tops[t].push_back(entries[i].first);
      needed_model_ids.insert(entries[i].first);
    }
  }

  // Posting lists in the reference corpus for every needed word.
  std::unordered_map<WordId, std::vector<std::uint32_t>> postings;  // model id -> doc list
  {
    std::unordered_map<WordId, WordId> ref_id;  // model id -> reference id
    for (WordId w : needed_model_ids) {
      const std::string& token = model.vocab.at(w);
      long r = reference.vocabulary.lookup(token);
      if (r < 0 || reference.vocabulary.doc_frequency[r] == 0) {
        throw DataError("top word '" + token +
                        "' never occurs in the reference corpus");
      }
      ref_id.emplace(w, static_cast<WordId>(r));
      postings.emplace(w, std::vector<std::uint32_t>{});
    }
    for (std::size_t d = 0; d < N; ++d) {
      for (auto& [w, list] : postings) {
        if (reference.documents[d].count_of(ref_id.at(w)) > 0) {
          list.push_back(static_cast<std::uint32_t>(d));
        }
      }
    }
  }

  auto co_document_frequency = [&](WordId a, WordId b) {
    const auto& la = postings.at(a);
    const auto& lb = postings.at(b);
    std::size_t i = 0, j = 0, both = 0;
    while (i < la.size() && j < lb.size()) {
      if (la[i] < lb[j]) {
        ++i;
      } else if (lb[j] < la[i]) {
        ++j;
      } else {
        ++both;
        ++i;
        ++j;
      }
    }
    return both;
  };

  CoherenceReport report;
  report.per_topic.resize(model.num_topics(), 0.0);
  for (std::uint32_t t = 0; t < model.num_topics(); ++t) {
    double sum = 0.0;
    const auto& words = tops[t];
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        std::size_t df_i = postings.at(words[i]).size();
        std::size_t df_j = postings.at(words[j]).size();
        std::size_t codf = co_document_frequency(words[i], words[j]);
        double pair;
        if (codf == 0) {
          pair = -1.0;
        } else if (codf == df_i && codf == df_j) {
          // always co-occur with identical frequencies: exactly 1, even
          // when the pair appears in every document
          pair = 1.0;
        } else {
          double p_ij = static_cast<double>(codf) / static_cast<double>(N);
          double p_i = static_cast<double>(df_i) / static_cast<double>(N);
          double p_j = static_cast<double>(df_j) / static_cast<double>(N);
          pair = std::log(p_ij / (p_i * p_j)) / (-std::log(p_ij));
          pair = std::clamp(pair, -1.0, 1.0);
        }
        sum += pair;
      }
    }
    report.per_topic[t] = sum;
  }
  double total = 0.0;
  for (double v : report.per_topic) total += v;
  report.mean = report.per_topic.empty()
                    ? 0.0
                    : total / static_cast<double>(report.per_topic.size());
  return report;
}

std::vector<std::uint32_t> hard_clusters(
    const std::vector<SparseDistribution>& rows) {
  std::vector<std::uint32_t> clusters(rows.size(), 0);
  for (std::size_t d = 0; d < rows.size(); ++d) {
    clusters[d] = rows[d].max_item();
  }
  return clusters;
}

std::vector<std::uint32_t> dense_labels(
    const std::vector<std::string>& labels) {
  std::vector<std::uint32_t> ids;
  ids.reserve(labels.size());
  std::unordered_map<std::string, std::uint32_t> index;
  for (const auto& label : labels) {
    auto [it, inserted] =
        index.try_emplace(label, static_cast<std::uint32_t>(index.size()));
    ids.push_back(it->second);
  }
  return ids;
}

double clustering_purity(const std::vector<std::uint32_t>& clusters,
                         const std::vector<std::uint32_t>& classes) {
  if (clusters.size() != classes.size() || clusters.empty()) {
    throw DataError("purity needs one class per document");
  }
  std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> contingency;
  for (std::size_t d = 0; d < clusters.size(); ++d) {
    contingency[clusters[d]][classes[d]] += 1;
  }
  std::size_t majority_total = 0;
  for (const auto& [cluster, per_class] : contingency) {
    std::size_t best = 0;
    for (const auto& [cls, count] : per_class) best = std::max(best, count);
    majority_total += best;
  }
  return static_cast<double>(majority_total) /
         static_cast<double>(clusters.size());
}

double normalized_mutual_information(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw DataError("NMI needs two label vectors of equal length");
  }
  const double n = static_cast<double>(a.size());
  std::map<std::uint32_t, std::size_t> count_a, count_b;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    count_a[a[i]] += 1;
    count_b[b[i]] += 1;
    joint[{a[i], b[i]}] += 1;
  }
  auto entropy = [n](const std::map<std::uint32_t, std::size_t>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
      double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  double h_a = entropy(count_a);
  double h_b = entropy(count_b);
  if (h_a == 0.0 && h_b == 0.0) return 1.0;
  if (h_a == 0.0 || h_b == 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [pair, c] : joint) {
    double p_ab = static_cast<double>(c) / n;
    double p_a = static_cast<double>(count_a.at(pair.first)) / n;
    double p_b = static_cast<double>(count_b.at(pair.second)) / n;
    mi += p_ab * std::log(p_ab / (p_a * p_b));
  }
  return 2.0 * mi / (h_a + h_b);
}

DocumentTopicMatrix infer_topics(const TopicModel& model, const Corpus& docs,
                                 const ReestimationConfig& config,
                                 std::optional<double> lambda_tar,
                                 std::uint64_t seed) {
  Corpus translated = translate_corpus(docs, model.vocab);
  DocumentTopicMatrix matrix;
  matrix.provenance = model.provenance;
  for (const auto& doc : translated.documents) {
    matrix.doc_ids.push_back(doc.id);
  }
  matrix.rows =
      fold_in(model, translated, config.fold_in_iterations, derive_seed(seed, 3));
  if (lambda_tar.has_value()) {
    matrix = assignment_reestimate(matrix, *lambda_tar, config.parsimony,
                                   config.background_smoothing_epsilon);
    matrix.provenance.lambda_tar = *lambda_tar;
  }
  return matrix;
}

std::vector<double> diversity_scores(
    const TopicModel& model, const std::vector<SparseDistribution>& rows) {
  return rao_diversity_all(rows, topic_distance_matrix(model.phi));
}

std::vector<std::pair<double, double>> lambda_sweep(
    const Corpus& training, PipelineVariant stage,
    const std::vector<double>& grid, const ReestimationConfig& base,
    const SyntheticSpec& synthetic, std::uint64_t seed) {
  if (stage != PipelineVariant::kLdaDr && stage != PipelineVariant::kLdaTr &&
      stage != PipelineVariant::kLdaTar) {
    throw DataError("lambda_sweep takes a single stage: dr, tr or tar");
  }
  if (grid.empty()) throw DataError("sweep grid is empty");
  for (double lambda : grid) {
    if (!(lambda > 0.0) || lambda > 1.0) {
      throw DataError("sweep grid values must be in (0, 1]");
    }
  }
  base.validate();

  Corpus benchmark = generate_diversity_dataset(training, synthetic);
  std::vector<int> labels;
  labels.reserve(benchmark.documents.size());
  for (const auto& doc : benchmark.documents) {
    labels.push_back(binary_label(doc.class_label));
  }

  // Training does not depend on lambda unless the stage rewrites the corpus,
  // so tr/tar sweeps share one base model.
  TopicModel base_model;
  if (stage != PipelineVariant::kLdaDr) {
    base_model = run_pipeline(training, PipelineVariant::kLda, base, seed).model;
  }

  std::vector<std::pair<double, double>> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double lambda = grid[i];
    TopicModel model;
    std::optional<double> eval_tar;
    if (stage == PipelineVariant::kLdaDr) {
      ReestimationConfig config = base;
      config.lambda_dr = lambda;
      model = run_pipeline(training, PipelineVariant::kLdaDr, config, seed).model;
    } else if (stage == PipelineVariant::kLdaTr) {
      model = lambda == 1.0
                  ? base_model
                  : topic_reestimate(base_model, training, lambda,
                                     base.parsimony,
                                     base.background_smoothing_epsilon,
                                     base.fold_in_iterations,
                                     derive_seed(seed, 2));
    } else {
      model = base_model;
      eval_tar = lambda;
    }

    DocumentTopicMatrix matrix =
        infer_topics(model, benchmark, base, eval_tar, seed);
    std::vector<double> scored = diversity_scores(model, matrix.rows);
    std::vector<LabeledScore> labeled(scored.size());
    for (std::size_t d = 0; d < scored.size(); ++d) {
      labeled[d] = LabeledScore{matrix.doc_ids[d], scored[d], labels[d]};
    }
    rows[i] = {lambda, roc_auc(labeled).auc};
  });
  return rows;
}

std::vector<FoldSplit> kfold_splits(std::size_t num_items,
                                    std::uint32_t num_folds,
                                    std::uint64_t seed) {
  if (num_folds < 3) {
    throw DataError("k-fold splitting needs at least 3 folds so a training "
                    "slice remains");
  }
  if (num_items < num_folds) {
    throw DataError("fewer items than folds");
  }
  std::vector<std::size_t> order(num_items);
  for (std::size_t i = 0; i < num_items; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_deterministic(order, rng);

  auto chunk_begin = [&](std::uint32_t f) {
    return num_items * f / num_folds;
  };
  std::vector<FoldSplit> splits(num_folds);
  for (std::uint32_t f = 0; f < num_folds; ++f) {
    std::uint32_t dev_fold = (f + 1) % num_folds;
    for (std::uint32_t c = 0; c < num_folds; ++c) {
      auto slice_start = chunk_begin(c);
      auto slice_end = chunk_begin(c + 1);
      auto& target = c == f ? splits[f].test
                            : (c == dev_fold ? splits[f].dev : splits[f].train);
      target.insert(target.end(), order.begin() + slice_start,
                    order.begin() + slice_end);
    }
    std::sort(splits[f].test.begin(), splits[f].test.end());
    std::sort(splits[f].dev.begin(), splits[f].dev.end());
    std::sort(splits[f].train.begin(), splits[f].train.end());
  }
  return splits;
}

}  // namespace hitr
