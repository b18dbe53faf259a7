#include "cpm/rng.hpp"

#include <cmath>
#include <limits>

namespace cpm {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    // mix64 is a bijection, so for fixed parent distinct indices give distinct seeds.
    return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ULL));
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(rng());
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

// Distributions are written out rather than taken from <random> so that the
// same seed yields the same stream under every standard library.

double standard_normal(Rng& rng) {
    double u, v, s;
    do {
        u = 2.0 * uniform01(rng) - 1.0;
        v = 2.0 * uniform01(rng) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

double standard_exponential(Rng& rng) {
    double u;
    do {
        u = uniform01(rng);
    } while (u == 0.0);
    return -std::log(u);
}

double gamma_unit(Rng& rng, double shape) {
    if (shape < 1.0) {
        // Boost to shape + 1 and correct with U^{1/shape}.
        double u;
        do {
            u = uniform01(rng);
        } while (u == 0.0);
        return gamma_unit(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia & Tsang (2000).
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = standard_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double inverse_gamma(Rng& rng, double shape, double scale) {
    return scale / gamma_unit(rng, shape);
}

}  // namespace cpm
