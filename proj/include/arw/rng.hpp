#pragma once

// Counter-based normal variates.
//
// Every variate is a pure function of (seed, stream, index): the 64-bit state
// seed ^ mix(stream) is advanced to position index with SplitMix64 and two
// 53-bit uniforms feed one Box-Muller transform. Draws therefore do not depend
// on evaluation order or thread count. Bit-reproducibility is promised within
// one build (libm's log/cos/sin may differ between platforms).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace arw::rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of an independent child stream, e.g. one Monte Carlo trial.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t child) {
  return splitmix64(parent ^ splitmix64(child + 0x632BE59BD9B4E019ULL));
}

/// Uniform in (0, 1]; never returns 0 so log() below is finite.
constexpr double uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(seed + counter * 0x9E3779B97F4A7C15ULL) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// A pair of independent standard normals for slot `index`.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index) {
  const double u1 = uniform(seed, 2 * index);
  const double u2 = uniform(seed, 2 * index + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double normal(std::uint64_t seed, std::uint64_t index) { return normal_pair(seed, index).first; }

}  // namespace arw::rng
