#pragma once

#include <cstdint>
#include <random>

namespace dk {

// Draw helpers used by every seeded generator in the library. Both go through
// the raw engine output only, so a fixed seed yields the same stream on every
// platform (std::uniform_int_distribution makes no such promise).

inline std::uint64_t rand_below(std::mt19937_64& g, std::uint64_t n) {
  return n ? g() % n : 0;
}

inline bool rand_chance(std::mt19937_64& g, double p) {
  // 53 uniform bits in [0,1); compares exactly for p = 0 and p = 1.
  double u = static_cast<double>(g() >> 11) * 0x1p-53;
  return u < p;
}

}  // namespace dk
