#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace hitr {

using ItemId = std::uint32_t;

// Sparse nonnegative weights over an integer-indexed domain, sorted by id.
// Unnormalized; the raw-material form fed into re-estimation.
using MassVector = std::vector<std::pair<ItemId, double>>;

// A normalized probability mass over an indexed domain (words or topics).
// Zeros are represented by absence: every stored entry is > 0, entries are
// sorted by id, and the entries sum to 1 within 1e-9. This is the universal
// currency of all re-estimation steps.
class SparseDistribution {
 public:
  SparseDistribution() = default;

  // Normalizes `mass`, dropping non-positive entries. Throws DataError if
  // any entry is negative or non-finite, or if the total is not positive.
  // Unsorted or duplicate-id input is rejected.
  static SparseDistribution from_mass(MassVector mass);

  // Wraps entries that are already a valid distribution (sum within 1e-9
  // of 1). Throws DataError otherwise.
  static SparseDistribution from_normalized(MassVector entries);

  double prob(ItemId id) const;  // 0 when absent
  bool contains(ItemId id) const { return prob(id) > 0.0; }

  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double sum() const;

  // Item with the highest probability; the lowest id wins ties.
  ItemId max_item() const;

  const MassVector& entries() const { return entries_; }

  bool operator==(const SparseDistribution&) const = default;

 private:
  explicit SparseDistribution(MassVector entries)
      : entries_(std::move(entries)) {}

  MassVector entries_;
};

}  // namespace hitr
