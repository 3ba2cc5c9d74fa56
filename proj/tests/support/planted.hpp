// Deterministic synthetic corpora with known structure, shared between the
// unit tests and the acceptance checks. Each group draws from its own
// disjoint word block; on top of that every document mixes in tokens from
// one or more shared "general" blocks, the impurity the re-estimation
// stages are supposed to strip.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hitr/corpus.hpp"
#include "hitr/rand.hpp"

namespace planted {

struct PlantedConfig {
  std::uint32_t groups = 10;
  std::uint32_t docs_per_group = 50;
  std::uint32_t doc_len = 100;
  std::uint32_t words_per_group = 30;
  std::uint32_t general_blocks = 1;    // number of shared blocks
  std::uint32_t words_per_general = 40;
  // Share of each document drawn from the general blocks. Sampled per
  // document in [min, max]; equal bounds give a fixed share.
  double general_fraction_min = 0.4;
  double general_fraction_max = 0.4;
  // Relative weight of each general block within that share (normalized
  // internally). Empty means equal weights.
  std::vector<double> general_block_shares;
  // Overrides the min/max sampling with a fixed per-group share (entry
  // g % size). Lets groups differ systematically instead of per document.
  std::vector<double> group_general_fraction;
  // Specific word blocks mixed into each document. 1 keeps the classic
  // one-group-per-document layout; higher values emulate documents that
  // genuinely span topics (the group label stays the first, owning block).
  std::uint32_t specific_blocks_per_doc = 1;
  // Probability that a specific-topic token emits a general word instead of
  // a group word, the way real topics leak function words. Keeps the
  // general topics' own contribution at the configured fraction while
  // letting a fit concentrate all general words on them.
  double specific_general_tail = 0.0;
  std::uint64_t seed = 1;
};

inline std::string group_name(std::uint32_t g) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "G%02u", g);
  return buf;
}

inline std::string group_word(std::uint32_t g, std::uint32_t w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "g%02uw%02u", g, w);
  return buf;
}

inline std::string general_word(std::uint32_t block, std::uint32_t w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "shared%uw%02u", block, w);
  return buf;
}

inline hitr::Corpus planted_corpus(const PlantedConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<double> block_cdf;
  double share_total = 0.0;
  for (std::uint32_t b = 0; b < config.general_blocks; ++b) {
    share_total += b < config.general_block_shares.size()
                       ? config.general_block_shares[b]
                       : (config.general_block_shares.empty() ? 1.0 : 0.0);
    block_cdf.push_back(share_total);
  }

  std::vector<hitr::CountedDocument> docs;
  docs.reserve(static_cast<std::size_t>(config.groups) * config.docs_per_group);
  for (std::uint32_t g = 0; g < config.groups; ++g) {
    for (std::uint32_t d = 0; d < config.docs_per_group; ++d) {
      double fraction;
      if (!config.group_general_fraction.empty()) {
        fraction = config.group_general_fraction
            [g % config.group_general_fraction.size()];
      } else {
        double span =
            config.general_fraction_max - config.general_fraction_min;
        fraction = config.general_fraction_min + span * hitr::uniform01(rng);
      }
      auto general_tokens = static_cast<std::uint32_t>(
          fraction * config.doc_len + 0.5);

      // the owning group plus (blocks_per_doc - 1) other groups, cycled
      // through round-robin for the specific tokens
      std::vector<std::uint32_t> blocks = {g};
      while (blocks.size() < config.specific_blocks_per_doc &&
             blocks.size() < config.groups) {
        std::uint32_t pick = hitr::uniform_below(rng, config.groups);
        if (std::find(blocks.begin(), blocks.end(), pick) == blocks.end()) {
          blocks.push_back(pick);
        }
      }

      std::map<std::string, std::uint32_t> counts;
      auto draw_general = [&]() {
        double u = hitr::uniform01(rng) * share_total;
        std::uint32_t block = 0;
        while (block + 1 < config.general_blocks && u >= block_cdf[block]) {
          ++block;
        }
        counts[general_word(
            block, hitr::uniform_below(rng, config.words_per_general))]++;
      };
      for (std::uint32_t i = 0; i < config.doc_len; ++i) {
        if (i < general_tokens && config.general_blocks > 0) {
          draw_general();
        } else if (config.specific_general_tail > 0.0 &&
                   config.general_blocks > 0 &&
                   hitr::uniform01(rng) < config.specific_general_tail) {
          draw_general();
        } else {
          std::uint32_t owner = blocks[i % blocks.size()];
          counts[group_word(
              owner, hitr::uniform_below(rng, config.words_per_group))]++;
        }
      }

      hitr::CountedDocument doc;
      doc.id = group_name(g) + "-" + std::to_string(d);
      doc.group = group_name(g);
      doc.token_counts.assign(counts.begin(), counts.end());
      docs.push_back(std::move(doc));
    }
  }
  return hitr::corpus_from_counts(docs);
}

// Word ids of one group's block in `corpus`; empty for unknown words.
inline std::vector<hitr::WordId> group_word_ids(const hitr::Corpus& corpus,
                                                const PlantedConfig& config,
                                                std::uint32_t g) {
  std::vector<hitr::WordId> ids;
  for (std::uint32_t w = 0; w < config.words_per_group; ++w) {
    long id = corpus.vocabulary.lookup(group_word(g, w));
    if (id >= 0) ids.push_back(static_cast<hitr::WordId>(id));
  }
  return ids;
}

inline std::vector<hitr::WordId> general_word_ids(const hitr::Corpus& corpus,
                                                  const PlantedConfig& config) {
  std::vector<hitr::WordId> ids;
  for (std::uint32_t b = 0; b < config.general_blocks; ++b) {
    for (std::uint32_t w = 0; w < config.words_per_general; ++w) {
      long id = corpus.vocabulary.lookup(general_word(b, w));
      if (id >= 0) ids.push_back(static_cast<hitr::WordId>(id));
    }
  }
  return ids;
}

}  // namespace planted
