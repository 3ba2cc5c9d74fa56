#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hitr/errors.hpp"
#include "hitr/evalkit.hpp"
#include "hitr/rand.hpp"
#include "oracles.hpp"
#include "support/planted.hpp"

using hitr::Corpus;
using hitr::DataError;
using hitr::LabeledScore;
using hitr::SparseDistribution;
using hitr::SyntheticSpec;
using hitr::TopicModel;

namespace {

Corpus grouped_corpus() {
  std::vector<hitr::CountedDocument> docs(4);
  docs[0] = {"a0", {{"r", 3}, {"s", 1}}, "A", ""};
  docs[1] = {"a1", {{"r", 1}, {"t", 2}}, "A", ""};
  docs[2] = {"b0", {{"u", 2}}, "B", ""};
  docs[3] = {"b1", {{"u", 1}, {"v", 4}}, "B", ""};
  return hitr::corpus_from_counts(docs);
}

Corpus docs_of_tokens(std::vector<std::vector<std::string>> docs) {
  std::vector<hitr::CountedDocument> counted;
  int i = 0;
  for (auto& tokens : docs) {
    hitr::CountedDocument doc;
    doc.id = "d" + std::to_string(i++);
    for (auto& t : tokens) doc.token_counts.push_back({t, 1});
    counted.push_back(std::move(doc));
  }
  return hitr::corpus_from_counts(counted);
}

TopicModel hand_model(std::vector<std::string> vocab,
                      std::vector<hitr::MassVector> phi_rows) {
  TopicModel model;
  model.vocab = std::move(vocab);
  for (auto& row : phi_rows) {
    model.phi.push_back(SparseDistribution::from_mass(std::move(row)));
  }
  return model;
}

std::string count_key(const hitr::Document& doc) {
  std::ostringstream out;
  for (const auto& [wid, count] : doc.counts) {
    out << wid << ":" << count << ";";
  }
  return out.str();
}

double trapezoid_area(const std::vector<hitr::RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) *
            (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace

TEST_CASE("binary_label maps the two class names") {
  CHECK(hitr::binary_label(hitr::kDiverseLabel) == 1);
  CHECK(hitr::binary_label(hitr::kNonDiverseLabel) == 0);
  CHECK_THROWS_AS(hitr::binary_label("other"), DataError);
}

TEST_CASE("synthetic benchmark combines documents without replacement") {
  auto corpus = grouped_corpus();
  SyntheticSpec spec;
  spec.group_pairs = {{"A", "B"}};
  spec.docs_per_pair = 2;
  spec.nondiverse_groups = {"A"};
  spec.docs_per_group = 1;
  spec.seed = 4;

  auto benchmark = hitr::generate_diversity_dataset(corpus, spec);
  REQUIRE(benchmark.documents.size() == 3);
  CHECK(benchmark.vocabulary.words == corpus.vocabulary.words);

  const auto& d0 = benchmark.documents[0];
  const auto& d1 = benchmark.documents[1];
  CHECK(d0.id == "diverse-A+B-0");
  CHECK(d0.group == "A+B");
  CHECK(d0.class_label == hitr::kDiverseLabel);
  CHECK(d1.id == "diverse-A+B-1");

  // with two docs per group, without-replacement sampling must use each
  // source document exactly once; only the pairing order is random
  auto combined = [&](const hitr::Document& x, const hitr::Document& y) {
    hitr::Document merged;
    std::map<hitr::WordId, std::uint32_t> sums;
    for (auto [w, c] : x.counts) sums[w] += c;
    for (auto [w, c] : y.counts) sums[w] += c;
    for (auto [w, c] : sums) {
      if (c / 2 > 0) merged.counts.push_back({w, c / 2});
    }
    return count_key(merged);
  };
  const auto& a0 = corpus.documents[0];
  const auto& a1 = corpus.documents[1];
  const auto& b0 = corpus.documents[2];
  const auto& b1 = corpus.documents[3];
  std::set<std::string> straight = {combined(a0, b0), combined(a1, b1)};
  std::set<std::string> crossed = {combined(a0, b1), combined(a1, b0)};
  std::set<std::string> got = {count_key(d0), count_key(d1)};
  CHECK((got == straight || got == crossed));

  // the lone non-diverse doc must be floor((a0+a1)/2): r:2, t:1, s gone
  const auto& nd = benchmark.documents[2];
  CHECK(nd.id == "non-diverse-A-0");
  CHECK(nd.group == "A");
  CHECK(nd.class_label == hitr::kNonDiverseLabel);
  CHECK(nd.count_of(corpus.vocabulary.lookup("r")) == 2);
  CHECK(nd.count_of(corpus.vocabulary.lookup("t")) == 1);
  CHECK(nd.count_of(corpus.vocabulary.lookup("s")) == 0);
}

TEST_CASE("synthetic benchmark is deterministic and exhaustible") {
  auto corpus = grouped_corpus();
  SyntheticSpec spec;
  spec.group_pairs = {{"A", "B"}};
  spec.docs_per_pair = 2;
  spec.nondiverse_groups = {"B"};
  spec.docs_per_group = 1;

  auto one = hitr::generate_diversity_dataset(corpus, spec);
  auto two = hitr::generate_diversity_dataset(corpus, spec);
  REQUIRE(one.documents.size() == two.documents.size());
  for (std::size_t i = 0; i < one.documents.size(); ++i) {
    CHECK(one.documents[i].counts == two.documents[i].counts);
  }

  spec.docs_per_pair = 3;  // group A only has two documents
  CHECK_THROWS_AS(hitr::generate_diversity_dataset(corpus, spec), DataError);
  spec.docs_per_pair = 1;
  spec.nondiverse_groups = {"C"};
  CHECK_THROWS_AS(hitr::generate_diversity_dataset(corpus, spec), DataError);

  SyntheticSpec bad;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.group_pairs = {{"A", "A"}};
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("roc_auc hand values") {
  std::vector<LabeledScore> scores = {
      {"p1", 0.9, 1}, {"p2", 0.4, 1}, {"n1", 0.6, 0}, {"n2", 0.1, 0}};
  auto result = hitr::roc_auc(scores);
  CHECK(result.auc == doctest::Approx(0.75).epsilon(1e-12));

  std::vector<LabeledScore> tied = {
      {"a", 0.5, 1}, {"b", 0.5, 0}, {"c", 0.5, 1}, {"d", 0.5, 0}};
  CHECK(hitr::roc_auc(tied).auc == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<LabeledScore> perfect = {
      {"a", 0.9, 1}, {"b", 0.8, 1}, {"c", 0.2, 0}};
  CHECK(hitr::roc_auc(perfect).auc == 1.0);

  std::vector<LabeledScore> one_class = {{"a", 0.9, 1}, {"b", 0.8, 1}};
  CHECK_THROWS_AS(hitr::roc_auc(one_class), DataError);
}

TEST_CASE("roc_auc equals pair counting on random ties-heavy inputs") {
  std::mt19937_64 rng(31337);
  for (int instance = 0; instance < 60; ++instance) {
    std::size_t n = 5 + hitr::uniform_below(rng, 60);
    std::vector<LabeledScore> scores;
    std::vector<std::pair<double, int>> plain;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse score grid so ties actually happen
      double s = hitr::uniform_below(rng, 8) / 8.0;
      int label = i < 2 ? static_cast<int>(i) : (hitr::uniform01(rng) < 0.5);
      scores.push_back({"d" + std::to_string(i), s, label});
      plain.push_back({s, label});
    }
    auto result = hitr::roc_auc(scores);
    CHECK(std::abs(result.auc - oracles::pairwise_auc(plain)) < 1e-12);

    // the reported curve must integrate back to the same number
    CHECK(std::abs(trapezoid_area(result.points) - result.auc) < 1e-9);
    CHECK(result.points.front().fpr == 0.0);
    CHECK(result.points.front().tpr == 0.0);
    CHECK(std::isinf(result.points.front().threshold));
    CHECK(result.points.back().fpr == 1.0);
    CHECK(result.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < result.points.size(); ++i) {
      CHECK(result.points[i].fpr >= result.points[i - 1].fpr);
      CHECK(result.points[i].tpr >= result.points[i - 1].tpr);
      CHECK(result.points[i].threshold < result.points[i - 1].threshold);
    }
  }
}

TEST_CASE("npmi coherence on a hand-checked reference") {
  // df: x=3, y=3, z=2; codf: xy=2, xz=1, yz=0; N=5
  auto reference = docs_of_tokens(
      {{"x", "y"}, {"x", "y"}, {"x", "z"}, {"y"}, {"z"}});
  auto model = hand_model({"x", "y", "z"}, {{{0, 3.0}, {1, 2.0}, {2, 1.0}}});

  auto report = hitr::npmi_coherence(model, 3, reference);
  REQUIRE(report.per_topic.size() == 1);
  // pair scores: xy = 0.114985, xz = -0.113283, yz = -1
  CHECK(report.per_topic[0] ==
        doctest::Approx(0.114985102 - 0.113282826 - 1.0).epsilon(1e-6));
  CHECK(report.mean == report.per_topic[0]);
}

TEST_CASE("npmi anchor cases") {
  SUBCASE("always co-occurring words with equal frequency score exactly 1") {
    auto reference = docs_of_tokens({{"p", "q"}, {"p", "q"}, {"r"}});
    auto model = hand_model({"p", "q"}, {{{0, 1.0}, {1, 1.0}}});
    CHECK(hitr::npmi_coherence(model, 2, reference).per_topic[0] == 1.0);
  }
  SUBCASE("independent words score exactly 0") {
    auto reference = docs_of_tokens({{"a", "b"}, {"a"}, {"b"}, {"c"}});
    auto model = hand_model({"a", "b"}, {{{0, 1.0}, {1, 1.0}}});
    CHECK(std::abs(hitr::npmi_coherence(model, 2, reference).per_topic[0]) <
          1e-12);
  }
  SUBCASE("all pair scores stay in [-1, 1]") {
    std::mt19937_64 rng(2);
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> vocab = {"w0", "w1", "w2", "w3", "w4", "w5"};
    for (int d = 0; d < 30; ++d) {
      std::vector<std::string> tokens;
      for (const auto& w : vocab) {
        if (hitr::uniform01(rng) < 0.4) tokens.push_back(w);
      }
      if (tokens.empty()) tokens.push_back("w0");
      docs.push_back(tokens);
    }
    auto reference = docs_of_tokens(docs);
    auto model = hand_model(
        vocab, {{{0, 3.0}, {1, 2.0}, {2, 1.0}},
                {{3, 3.0}, {4, 2.0}, {5, 1.0}}});
    auto report = hitr::npmi_coherence(model, 3, reference);
    for (double score : report.per_topic) {
      CHECK(score >= -3.0);  // sum of three pair scores
      CHECK(score <= 3.0);
    }
  }
  SUBCASE("top word missing from the reference is an error") {
    auto reference = docs_of_tokens({{"x"}, {"x"}});
    auto model = hand_model({"x", "ghost"}, {{{0, 1.0}, {1, 1.0}}});
    CHECK_THROWS_AS(hitr::npmi_coherence(model, 2, reference), DataError);
  }
  SUBCASE("top_n below 2 is meaningless") {
    auto reference = docs_of_tokens({{"x"}});
    auto model = hand_model({"x"}, {{{0, 1.0}}});
    CHECK_THROWS_AS(hitr::npmi_coherence(model, 1, reference), DataError);
  }
}

TEST_CASE("hard clusters and label densification") {
  std::vector<SparseDistribution> rows = {
      SparseDistribution::from_normalized({{0, 0.2}, {3, 0.8}}),
      SparseDistribution::from_normalized({{1, 0.5}, {2, 0.5}}),  // tie -> 1
  };
  CHECK(hitr::hard_clusters(rows) == std::vector<std::uint32_t>{3, 1});
  CHECK(hitr::dense_labels({"b", "a", "b", "c"}) ==
        std::vector<std::uint32_t>{0, 1, 0, 2});
}

TEST_CASE("purity and NMI hand values") {
  std::vector<std::uint32_t> clusters = {0, 0, 0, 1, 1, 1};
  std::vector<std::uint32_t> classes = {0, 0, 0, 0, 1, 1};
  CHECK(hitr::clustering_purity(clusters, classes) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  // 2x2 contingency {{3,1},{1,3}}
  std::vector<std::uint32_t> a = {0, 0, 0, 0, 1, 1, 1, 1};
  std::vector<std::uint32_t> b = {0, 0, 0, 1, 0, 1, 1, 1};
  CHECK(hitr::normalized_mutual_information(a, b) ==
        doctest::Approx(0.18872187554086717).epsilon(1e-12));
  CHECK(hitr::normalized_mutual_information(a, b) ==
        hitr::normalized_mutual_information(b, a));

  // perfect and degenerate cases
  CHECK(hitr::clustering_purity(a, a) == 1.0);
  CHECK(hitr::normalized_mutual_information(a, a) == 1.0);
  std::vector<std::uint32_t> constant(8, 0);
  CHECK(hitr::normalized_mutual_information(constant, constant) == 1.0);
  CHECK(hitr::normalized_mutual_information(constant, a) == 0.0);
  CHECK(hitr::clustering_purity(constant, a) == 0.5);
}

TEST_CASE("NMI matches the entropy identity on random labelings") {
  std::mt19937_64 rng(404);
  for (int instance = 0; instance < 20; ++instance) {
    std::size_t n = 50 + hitr::uniform_below(rng, 100);
    std::vector<std::uint32_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = hitr::uniform_below(rng, 4);
      b[i] = hitr::uniform_below(rng, 5);
    }
    double ha = oracles::entropy(a), hb = oracles::entropy(b);
    double want = 2.0 * oracles::mutual_information(a, b) / (ha + hb);
    CHECK(hitr::normalized_mutual_information(a, b) ==
          doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("infer_topics folds new documents into a trained model") {
  planted::PlantedConfig p;
  p.groups = 3;
  p.docs_per_group = 15;
  p.doc_len = 40;
  p.words_per_group = 10;
  p.general_blocks = 0;
  p.general_fraction_min = p.general_fraction_max = 0.0;
  auto corpus = planted::planted_corpus(p);

  hitr::ReestimationConfig config;
  config.lda.num_topics = 3;
  config.lda.train_iterations = 120;
  config.lda.burn_in = 80;
  auto model =
      hitr::run_pipeline(corpus, hitr::PipelineVariant::kLda, config, 6).model;

  auto matrix = hitr::infer_topics(model, corpus, config, std::nullopt, 8);
  REQUIRE(matrix.rows.size() == corpus.documents.size());
  CHECK(matrix.doc_ids.size() == corpus.documents.size());
  std::size_t agree = 0;
  for (std::size_t d = 0; d < matrix.rows.size(); ++d) {
    agree += matrix.rows[d].max_item() == model.theta[d].max_item();
  }
  CHECK(agree >= corpus.documents.size() * 9 / 10);

  auto again = hitr::infer_topics(model, corpus, config, std::nullopt, 8);
  for (std::size_t d = 0; d < matrix.rows.size(); ++d) {
    CHECK(matrix.rows[d] == again.rows[d]);
  }

  // re-estimating assignments on top prunes the smoothing mass
  auto sharp = hitr::infer_topics(model, corpus, config, 0.05, 8);
  std::size_t before = 0, after = 0;
  for (std::size_t d = 0; d < matrix.rows.size(); ++d) {
    before += matrix.rows[d].support_size();
    after += sharp.rows[d].support_size();
  }
  CHECK(after < before);
}

TEST_CASE("kfold splits partition the data") {
  auto splits = hitr::kfold_splits(10, 3, 7);
  REQUIRE(splits.size() == 3);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const auto& split = splits[f];
    std::set<std::size_t> all;
    all.insert(split.train.begin(), split.train.end());
    all.insert(split.dev.begin(), split.dev.end());
    all.insert(split.test.begin(), split.test.end());
    CHECK(all.size() == 10);
    CHECK(split.train.size() + split.dev.size() + split.test.size() == 10);
    CHECK(split.test.size() >= 3);
    CHECK(split.test.size() <= 4);
    // the dev slice is the next split's test slice
    CHECK(split.dev == splits[(f + 1) % splits.size()].test);
    CHECK(std::is_sorted(split.train.begin(), split.train.end()));
  }
  // every index appears in exactly one test slice
  std::set<std::size_t> tested;
  for (const auto& split : splits) {
    tested.insert(split.test.begin(), split.test.end());
  }
  CHECK(tested.size() == 10);

  CHECK(hitr::kfold_splits(10, 3, 7)[0].test == splits[0].test);
  CHECK(hitr::kfold_splits(10, 3, 8)[0].test != splits[0].test);
  CHECK_THROWS_AS(hitr::kfold_splits(10, 2, 1), DataError);
  CHECK_THROWS_AS(hitr::kfold_splits(2, 3, 1), DataError);
}

TEST_CASE("lambda sweep reproduces the baseline at lambda 1") {
  planted::PlantedConfig p;
  p.groups = 4;
  p.docs_per_group = 12;
  p.doc_len = 40;
  p.words_per_group = 10;
  p.general_blocks = 1;
  p.words_per_general = 12;
  p.general_fraction_min = 0.1;
  p.general_fraction_max = 0.5;
  auto corpus = planted::planted_corpus(p);

  SyntheticSpec spec;
  spec.group_pairs = {{"G00", "G01"}, {"G02", "G03"}};
  spec.docs_per_pair = 5;
  spec.nondiverse_groups = {"G00", "G01", "G02", "G03"};
  spec.docs_per_group = 3;
  spec.seed = 2;

  hitr::ReestimationConfig config;
  config.lda.num_topics = 5;
  config.lda.train_iterations = 80;
  config.lda.burn_in = 50;
  config.fold_in_iterations = 25;

  auto rows = hitr::lambda_sweep(corpus, hitr::PipelineVariant::kLdaTar,
                                 {1.0, 0.05}, config, spec, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == 1.0);
  CHECK(rows[1].first == 0.05);
  for (const auto& [lambda, auc] : rows) {
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }

  // assemble the lambda = 1 evaluation by hand: same model, same benchmark,
  // same fold-in seed, no assignment re-estimation
  auto benchmark = hitr::generate_diversity_dataset(corpus, spec);
  auto model =
      hitr::run_pipeline(corpus, hitr::PipelineVariant::kLda, config, 3).model;
  auto matrix = hitr::infer_topics(model, benchmark, config, std::nullopt, 3);
  auto scores = hitr::diversity_scores(model, matrix.rows);
  std::vector<LabeledScore> labeled;
  for (std::size_t d = 0; d < benchmark.documents.size(); ++d) {
    labeled.push_back({benchmark.documents[d].id, scores[d],
                       hitr::binary_label(benchmark.documents[d].class_label)});
  }
  CHECK(rows[0].second == hitr::roc_auc(labeled).auc);

  CHECK_THROWS_AS(hitr::lambda_sweep(corpus, hitr::PipelineVariant::kHitr,
                                     {0.5}, config, spec, 3),
                  DataError);
  CHECK_THROWS_AS(hitr::lambda_sweep(corpus, hitr::PipelineVariant::kLdaTar,
                                     {0.0}, config, spec, 3),
                  DataError);
  CHECK_THROWS_AS(hitr::lambda_sweep(corpus, hitr::PipelineVariant::kLdaTar,
                                     {}, config, spec, 3),
                  DataError);
}
