#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "hitr/errors.hpp"
#include "hitr/lda.hpp"
#include "hitr/parallel.hpp"
#include "support/planted.hpp"

using hitr::DataError;
using hitr::LdaConfig;

namespace {

LdaConfig small_config(std::uint32_t topics, std::uint32_t iters,
                       std::uint64_t seed) {
  LdaConfig c;
  c.num_topics = topics;
  c.train_iterations = iters;
  c.burn_in = iters > 50 ? iters - 50 : 0;
  c.seed = seed;
  return c;
}

planted::PlantedConfig disjoint_groups() {
  planted::PlantedConfig p;
  p.groups = 3;
  p.docs_per_group = 20;
  p.doc_len = 50;
  p.words_per_group = 12;
  p.general_blocks = 0;
  p.general_fraction_min = p.general_fraction_max = 0.0;
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  LdaConfig c = small_config(2, 100, 1);
  CHECK_NOTHROW(c.validate());
  CHECK(small_config(4, 100, 1).resolved_alpha() == doctest::Approx(0.25));
  c.alpha = 0.3;
  CHECK(c.resolved_alpha() == 0.3);

  c = small_config(1, 100, 1);
  CHECK_THROWS_AS(c.validate(), DataError);
  c = small_config(2, 10, 1);
  c.burn_in = 8;
  c.average_sweeps = 3;  // 8 + 3 > 10
  CHECK_THROWS_AS(c.validate(), DataError);
  c.average_sweeps = 2;
  CHECK_NOTHROW(c.validate());
  c.beta = 0.0;
  CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("training produces dense unit rows") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto model = hitr::train(corpus, small_config(3, 100, 7));
  REQUIRE(model.num_topics() == 3);
  REQUIRE(model.theta.size() == corpus.documents.size());
  CHECK(model.vocab == corpus.vocabulary.words);
  for (const auto& row : model.phi) {
    CHECK(row.support_size() == corpus.vocabulary.size());  // beta smoothing
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (const auto& row : model.theta) {
    CHECK(row.support_size() == 3);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("training is deterministic in the seed") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto a = hitr::train(corpus, small_config(3, 60, 11));
  auto b = hitr::train(corpus, small_config(3, 60, 11));
  CHECK(a.phi == b.phi);
  CHECK(a.theta == b.theta);
  auto c = hitr::train(corpus, small_config(3, 60, 12));
  CHECK(a.phi != c.phi);
}

TEST_CASE("disjoint word blocks are recovered as topics") {
  auto planted_config = disjoint_groups();
  auto corpus = planted::planted_corpus(planted_config);
  auto model = hitr::train(corpus, small_config(3, 150, 5));

  // every group's documents should peak on one topic, one topic per group
  std::map<std::string, std::set<hitr::ItemId>> peaks;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    peaks[corpus.documents[d].group].insert(model.theta[d].max_item());
  }
  std::set<hitr::ItemId> used;
  for (const auto& [group, topics] : peaks) {
    REQUIRE(topics.size() == 1);
    used.insert(*topics.begin());
  }
  CHECK(used.size() == 3);

  // and each topic's heaviest words should come from that group's block
  for (std::uint32_t g = 0; g < 3; ++g) {
    auto block = planted::group_word_ids(corpus, planted_config, g);
    std::set<hitr::WordId> block_set(block.begin(), block.end());
    hitr::ItemId topic = *peaks[planted::group_name(g)].begin();
    auto entries = model.phi[topic].entries();
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(block_set.count(entries[i].first) == 1);
    }
  }
}

TEST_CASE("averaging sweeps changes the point estimate") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto single = small_config(3, 80, 3);
  auto averaged = single;
  averaged.average_sweeps = 20;
  auto a = hitr::train(corpus, single);
  auto b = hitr::train(corpus, averaged);
  CHECK(a.phi != b.phi);  // same chain, different estimator
  for (const auto& row : b.theta) {
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("degenerate corpora are rejected") {
  hitr::Corpus empty;
  CHECK_THROWS_AS(hitr::train(empty, small_config(2, 10, 1)), DataError);

  auto corpus = planted::planted_corpus(disjoint_groups());
  hitr::Document hollow;
  hollow.id = "hollow";
  corpus.documents.push_back(hollow);
  CHECK_THROWS_AS(hitr::train(corpus, small_config(3, 10, 1)), DataError);
}

TEST_CASE("fold_in reproduces training assignments on easy data") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto model = hitr::train(corpus, small_config(3, 150, 5));
  auto rows = hitr::fold_in(model, corpus, 50, 99);
  REQUIRE(rows.size() == corpus.documents.size());
  std::size_t agree = 0;
  for (std::size_t d = 0; d < rows.size(); ++d) {
    CHECK(rows[d].sum() == doctest::Approx(1.0).epsilon(1e-9));
    agree += rows[d].max_item() == model.theta[d].max_item();
  }
  CHECK(agree >= corpus.documents.size() * 9 / 10);
}

TEST_CASE("fold_in is schedule-independent") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto model = hitr::train(corpus, small_config(3, 60, 2));
  hitr::set_max_jobs(1);
  auto serial = hitr::fold_in(model, corpus, 30, 4);
  hitr::set_max_jobs(4);
  auto threaded = hitr::fold_in(model, corpus, 30, 4);
  hitr::set_max_jobs(1);
  CHECK(serial == threaded);
}

TEST_CASE("fold_in rejects out-of-vocabulary ids") {
  auto corpus = planted::planted_corpus(disjoint_groups());
  auto model = hitr::train(corpus, small_config(3, 30, 2));
  hitr::Corpus alien = corpus;
  alien.documents[0].counts.push_back(
      {static_cast<hitr::WordId>(model.vocab.size() + 5), 1});
  CHECK_THROWS_AS(hitr::fold_in(model, alien, 10, 1), DataError);
}
