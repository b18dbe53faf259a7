#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "cpm/features.hpp"
#include "cpm/rng.hpp"

namespace cpm {

struct SamplerConfig {
    int n_burn = 1000;
    int n_keep = 1000;
    int thin = 1;
    std::uint64_t seed = 0;
    double bias_variance = 100.0;  // Normal(0, bias_variance) prior on the intercept

    void validate() const;
    bool operator==(const SamplerConfig&) const = default;
};

// Retained Gibbs draws for one window length. Row s of every sample matrix is draw s.
struct BlrPosterior {
    Eigen::MatrixXd alpha;         // n_keep x D weights
    Eigen::VectorXd bias;          // n_keep
    Eigen::VectorXd tau;           // n_keep global shrinkage scale
    Eigen::MatrixXd lambda_local;  // n_keep x D local shrinkage scales
    FeatureTransform transform;
    int window_len = 0;

    int n_samples() const { return static_cast<int>(bias.size()); }
    Eigen::VectorXd alpha_mean() const { return alpha.colwise().mean().transpose(); }
    void validate() const;

    bool operator==(const BlrPosterior& o) const {
        return alpha == o.alpha && bias == o.bias && tau == o.tau && lambda_local == o.lambda_local &&
               transform == o.transform && window_len == o.window_len;
    }
};

double sigmoid(double z);

// log(1 + exp(z)), stable for large |z|.
double softplus(double z);

// log P(y | x, alpha, b) = -log(1 + exp(-y (alpha'x + b))) with y in {-1, +1}.
double log_likelihood(std::span<const double> alpha, double b, std::span<const double> x, int y_pm);

// One draw of the stacked coefficients theta = (alpha, b) from
// N(Q^{-1} X'kappa, Q^{-1}), Q = X' diag(omega) X + diag(prior_precision), where
// the design carries a trailing intercept column. `mean` receives Q^{-1} X'kappa
// when non-null. Throws SingularSystem if Q is not positive definite.
Eigen::VectorXd draw_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& omega,
                                  const Eigen::VectorXd& design_t_kappa, const Eigen::VectorXd& prior_precision,
                                  Rng& rng, Eigen::VectorXd* mean = nullptr);

// Horseshoe logistic regression by Polya-Gamma Gibbs sampling. Labels are
// 0/1 (1 = safe) and X must already be standardised. The returned posterior
// carries an identity transform; callers attach the fitted one.
BlrPosterior gibbs_fit(const Eigen::MatrixXd& X, std::span<const int> y, const SamplerConfig& cfg);

// Posterior-predictive mean of sigmoid(alpha_s'x + b_s); x already standardised.
double predict_probability(const BlrPosterior& post, std::span<const double> x);

}  // namespace cpm
