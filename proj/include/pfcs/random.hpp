#pragma once

#include <cstdint>
#include <random>

namespace pfcs {

// std::mt19937_64 output is fixed by the standard, the distributions are
// not. These helpers keep generated traces identical across toolchains.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). `bound` must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  // Rejection keeps it unbiased; loops at most twice on average.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace pfcs
