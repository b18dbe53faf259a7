#pragma once

#include "cpm/rng.hpp"

namespace cpm {

// Exact draw from PG(1, z) by Devroye's alternating-series method as
// described by Polson, Scott & Windle (2013). E[PG(1, z)] = tanh(z/2) / (2z).
double sample_polya_gamma(double z, Rng& rng);

// Analytic moments, used by tests and diagnostics.
double polya_gamma_mean(double z);
double polya_gamma_variance(double z);

}  // namespace cpm
