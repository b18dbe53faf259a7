#include "cpm/polya_gamma.hpp"

#include <cmath>
#include <numbers>

namespace cpm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;  // switch point between the two series representations

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// n-th coefficient of the alternating series for J*(1, 0) at x.
double series_coef(int n, double x) {
    const double k = n + 0.5;
    if (x > kTrunc) return kPi * k * std::exp(-k * k * kPi * kPi * x / 2.0);
    return kPi * k * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * k * k / x);
}

// P(X < t) for X ~ InverseGaussian(mean 1/z, shape 1), written in z so z = 0 is fine.
double inverse_gaussian_cdf_at_trunc(double z) {
    const double root = 1.0 / std::sqrt(kTrunc);
    const double b = root * (kTrunc * z - 1.0);
    const double a = -root * (kTrunc * z + 1.0);
    double tail = 0.0;
    if (2.0 * z < 700.0) tail = std::exp(2.0 * z) * normal_cdf(a);
    return normal_cdf(b) + tail;
}

// InverseGaussian(mu, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
    const double mu = z > 0.0 ? 1.0 / z : INFINITY;
    double x = kTrunc + 1.0;
    if (mu > kTrunc) {
        // Propose from the truncated chi^-2 and accept with exp(-z^2 x / 2).
        for (;;) {
            double e1, e2;
            do {
                e1 = standard_exponential(rng);
                e2 = standard_exponential(rng);
            } while (e1 * e1 > 2.0 * e2 / kTrunc);
            x = kTrunc / ((1.0 + kTrunc * e1) * (1.0 + kTrunc * e1));
            if (uniform01(rng) <= std::exp(-0.5 * z * z * x)) return x;
        }
    }
    while (x > kTrunc) {
        const double n = standard_normal(rng);
        const double y = n * n;
        const double muy = mu * y;
        x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
        if (uniform01(rng) > mu / (mu + x)) x = mu * mu / x;
    }
    return x;
}

}  // namespace

double sample_polya_gamma(double z, Rng& rng) {
    // PG(1, z) = J*(1, |z|/2) / 4.
    z = 0.5 * std::abs(z);
    const double k = kPi * kPi / 8.0 + 0.5 * z * z;
    const double p = kPi / (2.0 * k) * std::exp(-k * kTrunc);
    const double q = 2.0 * std::exp(-z) * inverse_gaussian_cdf_at_trunc(z);
    const double mix = p / (p + q);

    for (;;) {
        const double x = uniform01(rng) < mix ? kTrunc + standard_exponential(rng) / k
                                              : truncated_inverse_gaussian(z, rng);
        double s = series_coef(0, x);
        const double y = uniform01(rng) * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_coef(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_coef(n, x);
                if (y > s) break;
            }
        }
    }
}

double polya_gamma_mean(double z) {
    if (std::abs(z) < 1e-6) return 0.25 - z * z / 48.0;
    return std::tanh(z / 2.0) / (2.0 * z);
}

double polya_gamma_variance(double z) {
    // Var PG(1, z) = (sinh z - z) / (4 z^3 cosh^2(z/2)); series near 0.
    if (std::abs(z) < 1e-3) return 1.0 / 24.0 - z * z / 120.0;
    const double ch = std::cosh(z / 2.0);
    return (std::sinh(z) - z) / (4.0 * z * z * z * ch * ch);
}

}  // namespace cpm
