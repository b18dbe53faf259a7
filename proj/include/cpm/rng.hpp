#pragma once

#include <cstdint>
#include <random>

namespace cpm {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser. A bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the `index`-th child stream of `parent`. For a fixed parent the
/// map index -> seed is injective, so sibling streams never share a seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer on [lo, hi], both inclusive.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

double standard_normal(Rng& rng);

/// Exp(1).
double standard_exponential(Rng& rng);

/// Gamma with the given shape and unit scale.
double gamma_unit(Rng& rng, double shape);

/// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale/x).
double inverse_gamma(Rng& rng, double shape, double scale);

}  // namespace cpm
