#include "hitr/lda.hpp"

#include <cmath>
#include <string>

#include "hitr/errors.hpp"
#include "hitr/parallel.hpp"
#include "hitr/rand.hpp"

namespace hitr {

double LdaConfig::resolved_alpha() const {
  return alpha > 0.0 ? alpha : 1.0 / static_cast<double>(num_topics);
}

void LdaConfig::validate() const {
  if (num_topics < 2) {
    throw DataError("num_topics must be at least 2");
  }
  if (!std::isfinite(alpha)) {
    throw DataError("alpha must be finite (or <= 0 to select 1/num_topics)");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DataError("beta must be positive");
  }
  if (train_iterations == 0) {
    throw DataError("train_iterations must be positive");
  }
  if (average_sweeps == 0) {
    throw DataError("average_sweeps must be positive");
  }
  if (static_cast<std::uint64_t>(burn_in) + average_sweeps > train_iterations) {
    throw DataError("burn_in plus average_sweeps must fit within "
                    "train_iterations");
  }
}

namespace {

// Flattened token stream: every occurrence of every word, documents
// back to back. Gibbs state is one topic per token.
struct TokenStream {
  std::vector<WordId> words;
  std::vector<std::size_t> doc_begin;  // documents.size() + 1 offsets
};

TokenStream flatten(const Corpus& corpus, std::size_t vocab_limit) {
  TokenStream stream;
  stream.words.reserve(corpus.total_tokens());
  stream.doc_begin.reserve(corpus.documents.size() + 1);
  stream.doc_begin.push_back(0);
  for (const auto& doc : corpus.documents) {
    if (doc.length == 0) {
      throw DataError("document '" + doc.id + "' is empty");
    }
    for (const auto& [wid, count] : doc.counts) {
      if (wid >= vocab_limit) {
        throw DataError("document '" + doc.id + "' uses word id " +
                        std::to_string(wid) + " outside the vocabulary");
      }
      for (std::uint32_t i = 0; i < count; ++i) stream.words.push_back(wid);
    }
    stream.doc_begin.push_back(stream.words.size());
  }
  return stream;
}

// Draws from unnormalized weights accumulated in `cumulative`.
std::uint32_t draw_from_cumulative(std::mt19937_64& rng,
                                   const std::vector<double>& cumulative) {
  double u = uniform01(rng) * cumulative.back();
  std::uint32_t t = 0;
  while (t + 1 < cumulative.size() && cumulative[t] <= u) ++t;
  return t;
}

}  // namespace

TopicModel train(const Corpus& corpus, const LdaConfig& config) {
  config.validate();
  if (corpus.documents.empty()) {
    throw DataError("cannot train on an empty corpus");
  }
  const std::size_t V = corpus.vocabulary.size();
  if (V == 0) throw DataError("cannot train on an empty vocabulary");
  const std::uint32_t T = config.num_topics;
  const std::size_t D = corpus.documents.size();
  const double alpha = config.resolved_alpha();
  const double beta = config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  TokenStream stream = flatten(corpus, V);
  const std::size_t N = stream.words.size();

  // Assignment counts, laid out so the per-token topic loop is contiguous.
  std::vector<std::uint32_t> n_wt(V * T, 0);  // [w*T + t]
  std::vector<std::uint32_t> n_dt(D * T, 0);  // [d*T + t]
  std::vector<std::uint64_t> n_t(T, 0);

  std::vector<std::uint32_t> z(N);
  std::mt19937_64 rng(config.seed);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t i = stream.doc_begin[d]; i < stream.doc_begin[d + 1]; ++i) {
      std::uint32_t t = uniform_below(rng, T);
      z[i] = t;
      n_wt[static_cast<std::size_t>(stream.words[i]) * T + t] += 1;
      n_dt[d * T + t] += 1;
      n_t[t] += 1;
    }
  }

  // Counts are averaged over the last `average_sweeps` sweeps (default: the
  // final one), all of which sit after burn_in by config validation.
  const std::uint32_t sample_from = config.train_iterations - config.average_sweeps;
  std::vector<double> acc_wt(V * T, 0.0);
  std::vector<double> acc_dt(D * T, 0.0);
  std::vector<double> acc_t(T, 0.0);

  std::vector<double> cumulative(T);
  for (std::uint32_t iter = 0; iter < config.train_iterations; ++iter) {
    for (std::size_t d = 0; d < D; ++d) {
      std::uint32_t* doc_counts = &n_dt[d * T];
      for (std::size_t i = stream.doc_begin[d]; i < stream.doc_begin[d + 1]; ++i) {
        const std::size_t w_off = static_cast<std::size_t>(stream.words[i]) * T;
        const std::uint32_t old_t = z[i];
        n_wt[w_off + old_t] -= 1;
        doc_counts[old_t] -= 1;
        n_t[old_t] -= 1;

        double total = 0.0;
        for (std::uint32_t t = 0; t < T; ++t) {
          total += (doc_counts[t] + alpha) * (n_wt[w_off + t] + beta) /
                   (static_cast<double>(n_t[t]) + v_beta);
          cumulative[t] = total;
        }
        const std::uint32_t new_t = draw_from_cumulative(rng, cumulative);

        z[i] = new_t;
        n_wt[w_off + new_t] += 1;
        doc_counts[new_t] += 1;
        n_t[new_t] += 1;
      }
    }
    if (iter >= sample_from) {
      for (std::size_t i = 0; i < n_wt.size(); ++i) acc_wt[i] += n_wt[i];
      for (std::size_t i = 0; i < n_dt.size(); ++i) acc_dt[i] += n_dt[i];
      for (std::uint32_t t = 0; t < T; ++t) acc_t[t] += static_cast<double>(n_t[t]);
    }
  }

  const double k = static_cast<double>(config.average_sweeps);
  TopicModel model;
  model.config = config;
  model.vocab = corpus.vocabulary.words;
  model.doc_ids.reserve(D);
  for (const auto& doc : corpus.documents) model.doc_ids.push_back(doc.id);
  model.provenance.variant = "lda";
  model.provenance.seed = config.seed;

  model.phi.reserve(T);
  for (std::uint32_t t = 0; t < T; ++t) {
    MassVector mass;
    mass.reserve(V);
    // from_mass normalizes by (mean n_t + V*beta), giving the smoothed ratio
    for (std::size_t w = 0; w < V; ++w) {
      mass.emplace_back(static_cast<ItemId>(w), acc_wt[w * T + t] / k + beta);
    }
    model.phi.push_back(SparseDistribution::from_mass(std::move(mass)));
  }

  model.theta.reserve(D);
  for (std::size_t d = 0; d < D; ++d) {
    MassVector mass;
    mass.reserve(T);
    for (std::uint32_t t = 0; t < T; ++t) {
      mass.emplace_back(t, acc_dt[d * T + t] / k + alpha);
    }
    model.theta.push_back(SparseDistribution::from_mass(std::move(mass)));
  }
  return model;
}

std::vector<SparseDistribution> fold_in(const TopicModel& model,
                                        const Corpus& corpus,
                                        std::uint32_t iterations,
                                        std::uint64_t seed) {
  const std::uint32_t T = model.num_topics();
  const std::size_t V = model.vocab_size();
  const double alpha = model.config.resolved_alpha();

  // Dense copy of phi for O(1) access in the sampling loop, plus a flag for
  // words whose probability was pruned away in every topic.
  std::vector<double> phi(V * T, 0.0);
  for (std::uint32_t t = 0; t < T; ++t) {
    for (const auto& [w, p] : model.phi[t].entries()) {
      phi[static_cast<std::size_t>(w) * T + t] = p;
    }
  }
  std::vector<char> word_active(V, 0);
  for (std::size_t w = 0; w < V; ++w) {
    for (std::uint32_t t = 0; t < T; ++t) {
      if (phi[w * T + t] > 0.0) {
        word_active[w] = 1;
        break;
      }
    }
  }

  std::vector<SparseDistribution> theta(corpus.documents.size());
  parallel_for(corpus.documents.size(), [&](std::size_t d) {
    const Document& doc = corpus.documents[d];
    std::vector<WordId> tokens;
    tokens.reserve(doc.length);
    for (const auto& [wid, count] : doc.counts) {
      if (wid >= V) {
        throw DataError("document '" + doc.id + "' uses word id " +
                        std::to_string(wid) +
                        " outside the model vocabulary");
      }
      if (!word_active[wid]) continue;  // pruned everywhere, contributes nothing
      for (std::uint32_t i = 0; i < count; ++i) tokens.push_back(wid);
    }

    std::mt19937_64 rng(derive_seed(seed, d));
    std::vector<std::uint32_t> n_t(T, 0);
    std::vector<std::uint32_t> assignment(tokens.size());
    std::vector<double> cumulative(T);

    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t w_off = static_cast<std::size_t>(tokens[i]) * T;
      double total = 0.0;
      for (std::uint32_t t = 0; t < T; ++t) {
        total += phi[w_off + t];
        cumulative[t] = total;
      }
      std::uint32_t t = draw_from_cumulative(rng, cumulative);
      assignment[i] = t;
      n_t[t] += 1;
    }

    for (std::uint32_t iter = 0; iter < iterations; ++iter) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::size_t w_off = static_cast<std::size_t>(tokens[i]) * T;
        n_t[assignment[i]] -= 1;
        double total = 0.0;
        for (std::uint32_t t = 0; t < T; ++t) {
          total += (n_t[t] + alpha) * phi[w_off + t];
          cumulative[t] = total;
        }
        std::uint32_t t = draw_from_cumulative(rng, cumulative);
        assignment[i] = t;
        n_t[t] += 1;
      }
    }

    MassVector mass;
    mass.reserve(T);
    for (std::uint32_t t = 0; t < T; ++t) {
      mass.emplace_back(t, n_t[t] + alpha);
    }
    theta[d] = SparseDistribution::from_mass(std::move(mass));
  });
  return theta;
}

}  // namespace hitr
