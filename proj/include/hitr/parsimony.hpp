#pragma once

#include <cstdint>
#include <vector>

#include "hitr/sparse_distribution.hpp"

namespace hitr {

// Controls the EM loop that splits an observed distribution into a
// distribution-specific part and a shared background part.
struct ParsimonyConfig {
  double lambda = 0.5;            // weight of the specific model, in (0, 1]
  double prune_threshold = 1e-4;  // entries below this are dropped after each M-step
  std::uint32_t max_iterations = 50;
  double convergence_tol = 1e-6;  // stop when max per-entry change falls below

  void validate() const;  // throws DataError on out-of-range values
};

// EM re-estimation: treats the normalized `mass` as a mixture of a specific
// model (weight lambda) and `background` (weight 1-lambda) and extracts the
// specific part.
//
//   init   p_i = mass_i / sum(mass)
//   E-step e_i = mass_i * lambda*p_i / (lambda*p_i + (1-lambda)*bg_i)
//   M-step p_i = e_i / sum(e)
//
// After each M-step, entries with p_i < prune_threshold are removed and the
// rest renormalized. Stops after max_iterations or once the max absolute
// per-entry change drops below convergence_tol, whichever comes first.
//
// lambda == 1 is the identity: the result is the normalized mass, with no
// pruning (the E-step factor is constant 1 and no re-estimation happens).
//
// The output support is always a subset of the input support. Throws
// DataError if some mass item has zero background probability while
// lambda < 1 (the caller must smooth the background), or if pruning empties
// the support.
SparseDistribution parsimonize(const MassVector& mass,
                               const SparseDistribution& background,
                               const ParsimonyConfig& config);

// Normalized sum of the given distributions:
//   bg_i = sum_k P_k(i) / sum_j sum_k P_k(j)
// With smoothing_epsilon > 0, epsilon is added to every item present in any
// input support before normalizing, so no supported item can end up with
// zero background probability.
SparseDistribution average_background(
    const std::vector<SparseDistribution>& distributions,
    double smoothing_epsilon = 0.0);

}  // namespace hitr
