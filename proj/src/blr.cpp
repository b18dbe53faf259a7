#include "cpm/blr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpm/error.hpp"
#include "cpm/polya_gamma.hpp"

namespace cpm {

namespace {

// Keeps the prior precision finite and the Cholesky factor well conditioned.
constexpr double kMinVariance = 1e-10;
constexpr double kMaxVariance = 1e10;

double clamp_variance(double v) { return std::clamp(v, kMinVariance, kMaxVariance); }

}  // namespace

void SamplerConfig::validate() const {
    if (n_burn < 0) throw ValidationError("sampler.n_burn must be >= 0");
    if (n_keep < 1) throw ValidationError("sampler.n_keep must be >= 1");
    if (thin < 1) throw ValidationError("sampler.thin must be >= 1");
    if (!(bias_variance > 0.0)) throw ValidationError("sampler.bias_variance must be > 0");
}

void BlrPosterior::validate() const {
    const auto s = bias.size();
    if (s < 1) throw ValidationError("posterior has no samples");
    if (alpha.rows() != s || tau.size() != s || lambda_local.rows() != s)
        throw DimensionMismatch("posterior sample arrays disagree on sample count");
    if (alpha.cols() != window_len || lambda_local.cols() != window_len)
        throw DimensionMismatch("posterior sample arrays disagree with window_len " + std::to_string(window_len));
    if ((tau.array() <= 0.0).any() || (lambda_local.array() <= 0.0).any())
        throw ValidationError("posterior shrinkage samples must be positive");
    if (transform.window_len != window_len)
        throw DimensionMismatch("posterior transform window differs from window_len");
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double log_likelihood(std::span<const double> alpha, double b, std::span<const double> x, int y_pm) {
    if (alpha.size() != x.size())
        throw DimensionMismatch("alpha has " + std::to_string(alpha.size()) + " entries, x has " +
                                std::to_string(x.size()));
    double z = b;
    for (std::size_t j = 0; j < x.size(); ++j) z += alpha[j] * x[j];
    return -softplus(-static_cast<double>(y_pm) * z);
}

Eigen::VectorXd draw_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& omega,
                                  const Eigen::VectorXd& design_t_kappa, const Eigen::VectorXd& prior_precision,
                                  Rng& rng, Eigen::VectorXd* mean) {
    const Eigen::Index p = design.cols();
    const Eigen::MatrixXd weighted = design.array().colwise() * omega.array().sqrt();
    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(p, p);
    precision.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    precision.diagonal() += prior_precision;

    const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> chol(precision);
    if (chol.info() != Eigen::Success)
        throw SingularSystem("coefficient precision matrix is not positive definite");

    Eigen::VectorXd mu = chol.solve(design_t_kappa);
    Eigen::VectorXd noise(p);
    for (Eigen::Index j = 0; j < p; ++j) noise[j] = standard_normal(rng);
    // L' v = noise gives v ~ N(0, Q^{-1}).
    Eigen::VectorXd theta = mu + chol.matrixU().solve(noise);
    if (!theta.allFinite()) throw SingularSystem("coefficient draw is not finite");
    if (mean) *mean = std::move(mu);
    return theta;
}

BlrPosterior gibbs_fit(const Eigen::MatrixXd& X, std::span<const int> y, const SamplerConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2) throw ValidationError("gibbs_fit needs at least 2 observations");
    if (d < 1) throw ValidationError("gibbs_fit needs at least 1 feature");
    if (static_cast<Eigen::Index>(y.size()) != n)
        throw DimensionMismatch(std::to_string(y.size()) + " labels for " + std::to_string(n) + " rows");
    if (!X.allFinite()) throw NonFiniteInput("design matrix has non-finite entries");
    int positives = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
        positives += v;
    }
    if (positives == 0 || positives == n)
        throw DegenerateLabels("training labels contain a single class");

    // Design with trailing intercept column; kappa_i = y_i - 1/2 = y_pm / 2.
    Eigen::MatrixXd design(n, d + 1);
    design.leftCols(d) = X;
    design.col(d).setOnes();
    Eigen::VectorXd kappa(n);
    for (Eigen::Index i = 0; i < n; ++i) kappa[i] = y[static_cast<std::size_t>(i)] - 0.5;
    const Eigen::VectorXd design_t_kappa = design.transpose() * kappa;

    Rng rng = make_rng(cfg.seed);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd lambda2 = Eigen::VectorXd::Ones(d);
    Eigen::VectorXd nu = Eigen::VectorXd::Ones(d);
    double tau2 = 1.0;
    double xi = 1.0;
    Eigen::VectorXd omega(n);
    Eigen::VectorXd prior_precision(d + 1);

    BlrPosterior post;
    post.window_len = static_cast<int>(d);
    post.transform = FeatureTransform::identity(static_cast<int>(d));
    post.alpha.resize(cfg.n_keep, d);
    post.bias.resize(cfg.n_keep);
    post.tau.resize(cfg.n_keep);
    post.lambda_local.resize(cfg.n_keep, d);

    const long total = static_cast<long>(cfg.n_burn) + static_cast<long>(cfg.n_keep) * cfg.thin;
    int kept = 0;
    for (long sweep = 0; sweep < total; ++sweep) {
        // (i) omega_i | theta ~ PG(1, x_i' theta)
        const Eigen::VectorXd z = design * theta;
        for (Eigen::Index i = 0; i < n; ++i) omega[i] = sample_polya_gamma(z[i], rng);

        // (ii) (alpha, b) | omega, tau, lambda
        for (Eigen::Index j = 0; j < d; ++j) prior_precision[j] = 1.0 / clamp_variance(tau2 * lambda2[j]);
        prior_precision[d] = 1.0 / cfg.bias_variance;
        theta = draw_coefficients(design, omega, design_t_kappa, prior_precision, rng);

        // (iii) local scales and their auxiliaries
        for (Eigen::Index j = 0; j < d; ++j) {
            const double a2 = theta[j] * theta[j];
            lambda2[j] = clamp_variance(inverse_gamma(rng, 1.0, 1.0 / nu[j] + a2 / (2.0 * tau2)));
            nu[j] = inverse_gamma(rng, 1.0, 1.0 + 1.0 / lambda2[j]);
        }

        // (iv) global scale and its auxiliary
        double ss = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) ss += theta[j] * theta[j] / lambda2[j];
        tau2 = clamp_variance(inverse_gamma(rng, (static_cast<double>(d) + 1.0) / 2.0, 1.0 / xi + ss / 2.0));
        xi = inverse_gamma(rng, 1.0, 1.0 + 1.0 / tau2);

        if (sweep >= cfg.n_burn && (sweep - cfg.n_burn) % cfg.thin == 0) {
            post.alpha.row(kept) = theta.head(d).transpose();
            post.bias[kept] = theta[d];
            post.tau[kept] = std::sqrt(tau2);
            post.lambda_local.row(kept) = lambda2.cwiseSqrt().transpose();
            ++kept;
        }
    }
    return post;
}

double predict_probability(const BlrPosterior& post, std::span<const double> x) {
    if (static_cast<int>(x.size()) != post.window_len)
        throw DimensionMismatch("feature vector of length " + std::to_string(x.size()) + " for window " +
                                std::to_string(post.window_len));
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd scores = post.alpha * xv + post.bias;
    double sum = 0.0;
    for (Eigen::Index s = 0; s < scores.size(); ++s) sum += sigmoid(scores[s]);
    const double p = sum / static_cast<double>(scores.size());
    // Keep the result inside the open unit interval even when every draw saturates.
    constexpr double kEdge = 1e-15;
    return std::clamp(p, kEdge, 1.0 - kEdge);
}

}  // namespace cpm
