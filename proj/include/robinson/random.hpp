#pragma once

#include <cstdint>
#include <random>

namespace robinson {

using Rng = std::mt19937_64;

/// Uniform double in the open interval (0,1) built from the top 53 bits.
/// Independent of the standard library's distribution implementation, so
/// seeded streams are reproducible across toolchains.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform index in [0, bound) without modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % bound;
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace robinson
