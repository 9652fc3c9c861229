#pragma once

#include <cstdint>
#include <random>

namespace msnb {

using Rng = std::mt19937_64;

/// Generator keyed by (seed, stream). Distinct streams give independent,
/// reproducible sequences; chain c of an ensemble uses stream c.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d736e62u};
  return Rng(seq);
}

/// Uniform on [0, 1).
inline double uniform01(Rng& rng) { return std::generate_canonical<double, 64>(rng); }

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

}  // namespace msnb
