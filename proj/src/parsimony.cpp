#include "hitr/parsimony.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hitr/errors.hpp"

namespace hitr {

void ParsimonyConfig::validate() const {
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw DataError("lambda must be in (0, 1], got " + std::to_string(lambda));
  }
  if (prune_threshold < 0.0 || prune_threshold >= 1.0) {
    throw DataError("prune_threshold must be in [0, 1), got " +
                    std::to_string(prune_threshold));
  }
  if (max_iterations == 0) {
    throw DataError("max_iterations must be positive");
  }
  if (convergence_tol < 0.0) {
    throw DataError("convergence_tol must be nonnegative");
  }
}

SparseDistribution parsimonize(const MassVector& mass,
                               const SparseDistribution& background,
                               const ParsimonyConfig& config) {
  config.validate();

  // Validates the mass vector and gives the maximum-likelihood start point.
  SparseDistribution init = SparseDistribution::from_mass(mass);
  if (config.lambda == 1.0) return init;

  struct Item {
    ItemId id;
    double mass;
    double bg;
    double p;
  };
  std::vector<Item> items;
  items.reserve(init.support_size());
  {
    // `mass` may contain zero entries that from_mass dropped; walk both
    // sorted lists together to recover the raw mass per surviving item.
    std::size_t m = 0;
    for (const auto& [id, p] : init.entries()) {
      while (mass[m].first != id) ++m;
      double bg = background.prob(id);
      if (bg == 0.0) {
        throw DataError("item " + std::to_string(id) +
                        " has zero background probability; smooth the "
                        "background before re-estimating");
      }
      items.push_back(Item{id, mass[m].second, bg, p});
    }
  }

  const double lambda = config.lambda;
  std::vector<double> estep(items.size());
  for (std::uint32_t iter = 0; iter < config.max_iterations; ++iter) {
    double esum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Item& it = items[i];
      estep[i] = it.mass * lambda * it.p / (lambda * it.p + (1.0 - lambda) * it.bg);
      esum += estep[i];
    }

    // M-step, then prune and renormalize the survivors in one pass: the
    // renormalized value of survivor i is estep[i] / kept_sum.
    double kept_sum = 0.0;
    std::vector<Item> survivors;
    survivors.reserve(items.size());
    double pruned_change = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      double np = estep[i] / esum;
      if (np < config.prune_threshold) {
        pruned_change = std::max(pruned_change, items[i].p);
        continue;
      }
      kept_sum += np;
      Item it = items[i];
      it.p = np;  // renormalized below
      survivors.push_back(it);
    }
    if (survivors.empty()) {
      throw DataError("re-estimation pruned every item; lower the prune "
                      "threshold or raise lambda");
    }

    for (Item& it : survivors) it.p /= kept_sum;

    // Per-entry change: survivors against their previous value, pruned
    // items against zero. Both lists stay sorted by id.
    double delta = pruned_change;
    {
      std::size_t j = 0;
      for (const Item& prev : items) {
        if (j < survivors.size() && survivors[j].id == prev.id) {
          delta = std::max(delta, std::abs(survivors[j].p - prev.p));
          ++j;
        }
      }
    }
    items = std::move(survivors);
    estep.resize(items.size());
    if (delta < config.convergence_tol) break;
  }

  MassVector out;
  out.reserve(items.size());
  for (const Item& it : items) out.emplace_back(it.id, it.p);
  return SparseDistribution::from_mass(std::move(out));
}

SparseDistribution average_background(
    const std::vector<SparseDistribution>& distributions,
    double smoothing_epsilon) {
  if (distributions.empty()) {
    throw DataError("average_background needs at least one distribution");
  }
  std::map<ItemId, double> sums;
  for (const auto& dist : distributions) {
    for (const auto& [id, p] : dist.entries()) sums[id] += p;
  }
  if (sums.empty()) {
    throw DataError("average_background over empty supports");
  }
  MassVector mass;
  mass.reserve(sums.size());
  for (const auto& [id, total] : sums) {
    mass.emplace_back(id, total + smoothing_epsilon);
  }
  return SparseDistribution::from_mass(std::move(mass));
}

}  // namespace hitr
