#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crowdnav {

/// Uniform integer in [0, bound) from a 64-bit engine, by rejection.
/// Unlike std::uniform_int_distribution the result is the same on every
/// standard library.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = 0;
  do x = rng(); while (x >= limit);
  return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// FNV-1a, stable across platforms; used to derive seeds from ids.
inline std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace crowdnav
