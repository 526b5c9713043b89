#pragma once

#include <cstdint>
#include <random>

namespace vsr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream identifiers keep independent draws for the same scenario apart.
enum class RngStream : std::uint64_t {
  Periods = 1,
  Errors = 2,
  InitialState = 3,
  Grid = 4,
  Search = 5,
};

/// Engine keyed by (seed, stream, index): scenario i draws the same numbers
/// no matter how scenarios are partitioned across workers.
inline std::mt19937_64 make_engine(std::uint64_t seed, RngStream stream,
                                   std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ index);
  return std::mt19937_64(h);
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace vsr
