#include "hitr/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hitr/errors.hpp"
#include "hitr/parallel.hpp"

namespace hitr {

double angular_distance(const SparseDistribution& a,
                        const SparseDistribution& b) {
  if (a.empty() || b.empty()) {
    throw DataError("angular distance of an empty distribution");
  }
  double dot = 0.0;
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].first < eb[j].first) {
      ++i;
    } else if (eb[j].first < ea[i].first) {
      ++j;
    } else {
      dot += ea[i].second * eb[j].second;
      ++i;
      ++j;
    }
  }
  double norm_a = 0.0, norm_b = 0.0;
  for (const auto& [id, p] : ea) norm_a += p * p;
  for (const auto& [id, p] : eb) norm_b += p * p;
  // One sqrt over the product, not a product of sqrts: for identical inputs
  // dot equals both norms, sqrt(x * x) == x in round-to-nearest, and the
  // self-distance comes out exactly 0.
  double cosine = dot / std::sqrt(norm_a * norm_b);
  cosine = std::clamp(cosine, 0.0, 1.0);
  return 2.0 / std::numbers::pi * std::acos(cosine);
}

std::vector<std::vector<double>> topic_distance_matrix(
    const std::vector<SparseDistribution>& phi) {
  const std::size_t n = phi.size();
  std::vector<std::vector<double>> distances(n, std::vector<double>(n, 0.0));
  // Row i fills its upper triangle and mirrors it; no two workers touch the
  // same cell.
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = angular_distance(phi[i], phi[j]);
      distances[i][j] = d;
      distances[j][i] = d;
    }
  });
  return distances;
}

double rao_diversity(const SparseDistribution& topic_mixture,
                     const std::vector<std::vector<double>>& distances) {
  const auto& entries = topic_mixture.entries();
  if (!entries.empty() && entries.back().first >= distances.size()) {
    throw DataError("topic " + std::to_string(entries.back().first) +
                    " is missing from the distance matrix");
  }
  double total = 0.0;
  for (const auto& [i, pi] : entries) {
    for (const auto& [j, pj] : entries) {
      total += pi * pj * distances[i][j];
    }
  }
  return total;
}

std::vector<double> rao_diversity_all(
    const std::vector<SparseDistribution>& rows,
    const std::vector<std::vector<double>>& distances) {
  std::vector<double> scores(rows.size(), 0.0);
  parallel_for(rows.size(), [&](std::size_t d) {
    scores[d] = rao_diversity(rows[d], distances);
  });
  return scores;
}

}  // namespace hitr
