#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace hitr {

// Derives an independent stream seed from a base seed (splitmix64 step).
// Used so that document-parallel stages give results identical to a serial
// run regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Bounded draw and unit-interval draw with fully specified arithmetic;
// std::uniform_*_distribution is implementation-defined and would make
// seeded runs differ across standard libraries.
inline std::uint32_t uniform_below(std::mt19937_64& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(rng() % n);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with the deterministic draws above.
template <typename T>
void shuffle_deterministic(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_below(rng, static_cast<std::uint32_t>(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace hitr
