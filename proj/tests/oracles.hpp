// Independent reference implementations used to cross-check the library.
// Everything here is written the dumb way on purpose: std::map instead of
// sorted vectors, full double loops instead of rank tricks, no pruning
// shortcuts. Keep it that way.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hitr/sparse_distribution.hpp"

namespace oracles {

// EM re-estimation of a specific language model against a background, on
// maps keyed by item id. Mirrors the published update rule directly:
//   E: e_i = mass_i * lambda*p_i / (lambda*p_i + (1-lambda)*bg_i)
//   M: p_i = e_i / sum(e), then drop p_i < threshold and renormalize.
inline std::map<hitr::ItemId, double> parsimonize(
    const std::map<hitr::ItemId, double>& mass,
    const std::map<hitr::ItemId, double>& background, double lambda,
    std::uint32_t max_iterations, double threshold, double tol) {
  std::map<hitr::ItemId, double> p;
  double total = 0.0;
  for (const auto& [id, m] : mass) total += m;
  for (const auto& [id, m] : mass) p[id] = m / total;
  if (lambda == 1.0) return p;

  for (std::uint32_t iter = 0; iter < max_iterations; ++iter) {
    std::map<hitr::ItemId, double> e;
    double e_sum = 0.0;
    for (const auto& [id, pi] : p) {
      double bg = background.at(id);
      double num = lambda * pi;
      e[id] = mass.at(id) * num / (num + (1.0 - lambda) * bg);
      e_sum += e[id];
    }
    std::map<hitr::ItemId, double> next;
    double kept = 0.0;
    double delta = 0.0;
    for (const auto& [id, ei] : e) {
      double np = ei / e_sum;
      if (np < threshold) {
        delta = std::max(delta, p.at(id));
        continue;
      }
      next[id] = np;
      kept += np;
    }
    for (auto& [id, np] : next) np /= kept;
    for (const auto& [id, np] : next) {
      delta = std::max(delta, std::abs(np - p.at(id)));
    }
    p = std::move(next);
    if (delta < tol) break;
  }
  return p;
}

// AUC by counting concordant positive/negative pairs, ties worth half.
inline double pairwise_auc(const std::vector<std::pair<double, int>>& scored) {
  double wins = 0.0;
  std::size_t positives = 0, negatives = 0;
  for (const auto& [sp, lp] : scored) {
    if (lp != 1) continue;
    ++positives;
    for (const auto& [sn, ln] : scored) {
      if (ln != 0) continue;
      if (sp > sn) wins += 1.0;
      else if (sp == sn) wins += 0.5;
    }
  }
  for (const auto& [s, l] : scored) negatives += (l == 0);
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

// Rao quadratic entropy over a dense weight vector.
inline double rao(const std::vector<double>& weights,
                  const std::vector<std::vector<double>>& distance) {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
      sum += weights[i] * weights[j] * distance[i][j];
    }
  }
  return sum;
}

inline std::vector<double> densify(const hitr::SparseDistribution& dist,
                                   std::size_t size) {
  std::vector<double> dense(size, 0.0);
  for (const auto& [id, p] : dist.entries()) dense[id] = p;
  return dense;
}

// Entropy / mutual information on label vectors, natural log.
inline double entropy(const std::vector<std::uint32_t>& labels) {
  std::map<std::uint32_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  double h = 0.0;
  const double n = static_cast<double>(labels.size());
  for (const auto& [l, c] : counts) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

inline double mutual_information(const std::vector<std::uint32_t>& a,
                                 const std::vector<std::uint32_t>& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
  std::map<std::uint32_t, std::size_t> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [ab, c] : joint) {
    double pab = c / n;
    double pa = ca[ab.first] / n;
    double pb = cb[ab.second] / n;
    mi += pab * std::log(pab / (pa * pb));
  }
  return mi;
}

}  // namespace oracles
