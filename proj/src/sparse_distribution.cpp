#include "hitr/sparse_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hitr/errors.hpp"

namespace hitr {

namespace {

// Shared validation for both constructors: ids strictly increasing, values
// finite and nonnegative.
void check_mass(const MassVector& mass) {
  for (std::size_t i = 0; i < mass.size(); ++i) {
    double v = mass[i].second;
    if (!std::isfinite(v)) {
      throw DataError("distribution entry for item " +
                      std::to_string(mass[i].first) + " is not finite");
    }
    if (v < 0.0) {
      throw DataError("distribution entry for item " +
                      std::to_string(mass[i].first) + " is negative");
    }
    if (i > 0 && mass[i].first <= mass[i - 1].first) {
      throw DataError("distribution entries must be sorted by id without "
                      "duplicates (offending id " +
                      std::to_string(mass[i].first) + ")");
    }
  }
}

}  // namespace

SparseDistribution SparseDistribution::from_mass(MassVector mass) {
  check_mass(mass);
  double total = 0.0;
  for (const auto& [id, v] : mass) total += v;
  if (!(total > 0.0)) {
    throw DataError("cannot normalize a distribution with zero total mass");
  }
  MassVector entries;
  entries.reserve(mass.size());
  for (const auto& [id, v] : mass) {
    if (v > 0.0) entries.emplace_back(id, v / total);
  }
  return SparseDistribution(std::move(entries));
}

SparseDistribution SparseDistribution::from_normalized(MassVector entries) {
  check_mass(entries);
  double total = 0.0;
  for (const auto& [id, v] : entries) {
    if (v == 0.0) {
      throw DataError("normalized distributions represent zeros by absence "
                      "(item " + std::to_string(id) + ")");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("distribution sums to " + std::to_string(total) +
                    ", expected 1");
  }
  return SparseDistribution(std::move(entries));
}

double SparseDistribution::prob(ItemId id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), id,
      [](const std::pair<ItemId, double>& e, ItemId key) { return e.first < key; });
  if (it == entries_.end() || it->first != id) return 0.0;
  return it->second;
}

double SparseDistribution::sum() const {
  double total = 0.0;
  for (const auto& [id, v] : entries_) total += v;
  return total;
}

ItemId SparseDistribution::max_item() const {
  if (entries_.empty()) throw DataError("max_item on an empty distribution");
  ItemId best = entries_.front().first;
  double best_p = entries_.front().second;
  for (const auto& [id, p] : entries_) {
    if (p > best_p) {
      best = id;
      best_p = p;
    }
  }
  return best;
}

}  // namespace hitr
