#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "cpm/blr.hpp"
#include "cpm/error.hpp"

using namespace cpm;

namespace {

struct Data {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

// x = +-U[1, 3], y = 1 iff x > 0.
Data separable_1d(int n, std::uint64_t seed) {
    auto rng = make_rng(seed);
    Data d{Eigen::MatrixXd(n, 1), std::vector<int>(static_cast<std::size_t>(n))};
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2;
        const double mag = uniform(rng, 1.0, 3.0);
        d.X(i, 0) = cls ? mag : -mag;
        d.y[i] = cls;
    }
    return d;
}

// Logistic data with true weights w and bias b.
Data logistic_data(int n, const std::vector<double>& w, double b, std::uint64_t seed) {
    auto rng = make_rng(seed);
    const int dim = static_cast<int>(w.size());
    Data d{Eigen::MatrixXd(n, dim), std::vector<int>(static_cast<std::size_t>(n))};
    for (int i = 0; i < n; ++i) {
        double s = b;
        for (int j = 0; j < dim; ++j) {
            d.X(i, j) = standard_normal(rng);
            s += w[j] * d.X(i, j);
        }
        d.y[i] = uniform01(rng) < 1.0 / (1.0 + std::exp(-s)) ? 1 : 0;
    }
    return d;
}

SamplerConfig quick(std::uint64_t seed, int burn = 300, int keep = 500) {
    SamplerConfig cfg;
    cfg.n_burn = burn;
    cfg.n_keep = keep;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> row(const Eigen::MatrixXd& X, int i) {
    std::vector<double> r(static_cast<std::size_t>(X.cols()));
    for (int j = 0; j < X.cols(); ++j) r[j] = X(i, j);
    return r;
}

BlrPosterior constant_posterior(int samples, int dim, double alpha, double bias) {
    BlrPosterior p;
    p.alpha = Eigen::MatrixXd::Constant(samples, dim, alpha);
    p.bias = Eigen::VectorXd::Constant(samples, bias);
    p.tau = Eigen::VectorXd::Ones(samples);
    p.lambda_local = Eigen::MatrixXd::Ones(samples, dim);
    p.transform = FeatureTransform::identity(dim);
    p.window_len = dim;
    return p;
}

}  // namespace

TEST_CASE("log-likelihood examples") {
    const std::vector<double> zero{0, 0, 0}, x{1, -2, 3};
    CHECK(log_likelihood(zero, 0.0, x, 1) == doctest::Approx(std::log(0.5)));
    CHECK(log_likelihood(zero, 0.0, x, -1) == doctest::Approx(std::log(0.5)));
    const std::vector<double> one{1.0}, big{-800.0};
    const double ll = log_likelihood(one, 0.0, big, 1);
    CHECK(std::isfinite(ll));
    CHECK(ll == doctest::Approx(-800.0));
    CHECK(log_likelihood(one, 0.0, big, -1) == doctest::Approx(0.0));
    CHECK(log_likelihood(one, 700.0, std::vector<double>{0.0}, 1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(log_likelihood(one, 0.0, x, 1), DimensionMismatch);
}

TEST_CASE("sigmoid and softplus stay finite") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-1000.0) >= 0.0);
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(softplus(1000.0) == doctest::Approx(1000.0));
    CHECK(softplus(-1000.0) >= 0.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("Gaussian coefficient step matches the ridge solution") {
    auto rng = make_rng(21);
    const int n = 40, d = 3;
    Eigen::MatrixXd design(n, d + 1);
    Eigen::VectorXd omega(n), kappa(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) design(i, j) = standard_normal(rng);
        design(i, d) = 1.0;
        omega(i) = uniform(rng, 0.05, 0.3);
        kappa(i) = (i % 2) ? 0.5 : -0.5;
    }
    Eigen::VectorXd prior(d + 1);
    prior << 0.5, 2.0, 1.0, 0.01;

    // Reference: explicit precision and a QR solve.
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (int i = 0; i < n; ++i) Q += omega(i) * design.row(i).transpose() * design.row(i);
    Q.diagonal() += prior;
    const Eigen::VectorXd xtk = design.transpose() * kappa;
    const Eigen::VectorXd ridge = Q.colPivHouseholderQr().solve(xtk);
    const Eigen::MatrixXd cov = Q.inverse();

    const int draws = 10000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d + 1), mean;
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (int s = 0; s < draws; ++s) {
        const Eigen::VectorXd th = draw_coefficients(design, omega, xtk, prior, rng, &mean);
        sum += th;
        outer += (th - ridge) * (th - ridge).transpose();
    }
    for (int j = 0; j <= d; ++j) CHECK(mean(j) == doctest::Approx(ridge(j)).epsilon(1e-10));
    const Eigen::VectorXd emp = sum / draws;
    for (int j = 0; j <= d; ++j) {
        const double se = std::sqrt(cov(j, j) / draws);
        CHECK(std::abs(emp(j) - ridge(j)) < 3 * se);
    }
    const Eigen::MatrixXd emp_cov = outer / draws;
    for (int j = 0; j <= d; ++j) CHECK(emp_cov(j, j) == doctest::Approx(cov(j, j)).epsilon(0.06));
}

TEST_CASE("separable 1-D data agrees with the Newton maximum-likelihood fit") {
    const auto train = separable_1d(200, 1);
    const auto mle = oracle::newton_logistic(train.X, train.y);
    const auto post = gibbs_fit(train.X, train.y, quick(1));
    const double a = post.alpha_mean()(0);
    CHECK(a > 0.0);
    CHECK((a > 0.0) == (mle(0) > 0.0));

    const auto test = separable_1d(400, 2);
    int correct = 0, mle_correct = 0;
    for (int i = 0; i < 400; ++i) {
        const double p = predict_probability(post, row(test.X, i));
        correct += (p >= 0.5) == (test.y[i] == 1);
        mle_correct += (mle(0) * test.X(i, 0) + mle(1) >= 0.0) == (test.y[i] == 1);
    }
    CHECK(correct / 400.0 >= 0.95);
    CHECK(mle_correct / 400.0 >= 0.95);
    CHECK(predict_probability(post, std::vector<double>{3.0}) > 0.95);
    CHECK(predict_probability(post, std::vector<double>{-3.0}) < 0.05);
}

TEST_CASE("horseshoe shrinks noise features") {
    auto rng = make_rng(31);
    const int n = 500, d = 20;
    Eigen::MatrixXd X(n, d);
    std::vector<int> y_noise(n), y_signal(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = standard_normal(rng);
        y_noise[i] = uniform01(rng) < 0.5;
        y_signal[i] = X(i, 0) > 0.0;
    }
    const auto noise = gibbs_fit(X, y_noise, quick(3, 300, 300));
    const auto signal = gibbs_fit(X, y_signal, quick(3, 300, 300));
    const double noise_mag = noise.alpha_mean().cwiseAbs().mean();
    const double signal_mag = signal.alpha_mean().cwiseAbs().mean();
    CHECK(noise_mag <= 0.5 * signal_mag);
    // The signal coefficient dominates the rest.
    const Eigen::VectorXd sm = signal.alpha_mean().cwiseAbs();
    CHECK(sm(0) > 5.0 * sm.tail(d - 1).maxCoeff());
}

TEST_CASE("fits are deterministic for a fixed seed") {
    const auto d = logistic_data(100, {1.0, -0.5, 0.0}, 0.2, 4);
    const auto a = gibbs_fit(d.X, d.y, quick(7, 50, 50));
    const auto b = gibbs_fit(d.X, d.y, quick(7, 50, 50));
    CHECK(a == b);
    CHECK(a.alpha.rows() == 50);
    CHECK(a.alpha.cols() == 3);
    CHECK(a.tau.minCoeff() > 0.0);
    CHECK(a.lambda_local.minCoeff() > 0.0);
    const auto c = gibbs_fit(d.X, d.y, quick(8, 50, 50));
    CHECK_FALSE(a == c);
}

TEST_CASE("thinning keeps n_keep draws") {
    const auto d = logistic_data(60, {1.0}, 0.0, 5);
    auto cfg = quick(1, 10, 20);
    cfg.thin = 3;
    const auto post = gibbs_fit(d.X, d.y, cfg);
    CHECK(post.n_samples() == 20);
}

TEST_CASE("chains mix on a well-posed problem") {
    const auto d = logistic_data(300, {1.5, -1.0}, 0.5, 6);
    const auto post = gibbs_fit(d.X, d.y, quick(9, 500, 2000));
    CHECK(oracle::split_rhat(post.bias) < 1.1);
    CHECK(oracle::split_rhat(post.alpha.col(0)) < 1.1);
    const auto mle = oracle::newton_logistic(d.X, d.y);
    CHECK(post.alpha_mean()(0) == doctest::Approx(mle(0)).epsilon(0.25));
    CHECK(post.bias.mean() == doctest::Approx(mle(2)).epsilon(0.4));
}

TEST_CASE("swapping labels mirrors the predictive probability") {
    const auto d = logistic_data(400, {1.2, -0.8}, 0.0, 10);
    std::vector<int> flipped(d.y.size());
    std::transform(d.y.begin(), d.y.end(), flipped.begin(), [](int v) { return 1 - v; });
    const auto a = gibbs_fit(d.X, d.y, quick(11, 500, 2000));
    const auto b = gibbs_fit(d.X, flipped, quick(12, 500, 2000));
    for (int i = 0; i < 20; ++i) {
        const auto x = row(d.X, i);
        CHECK(predict_probability(b, x) == doctest::Approx(1.0 - predict_probability(a, x)).epsilon(0.02));
    }
}

TEST_CASE("predictive probability properties") {
    const auto zero = constant_posterior(10, 4, 0.0, 0.0);
    CHECK(predict_probability(zero, std::vector<double>{1, 2, 3, 4}) == 0.5);

    const auto d = logistic_data(150, {1.0, 2.0}, -0.3, 13);
    auto post = gibbs_fit(d.X, d.y, quick(14, 100, 200));
    auto neg = post;
    neg.alpha = -neg.alpha;
    neg.bias = -neg.bias;
    for (int i = 0; i < 10; ++i) {
        const auto x = row(d.X, i);
        const double p = predict_probability(post, x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        CHECK(predict_probability(neg, x) == doctest::Approx(1.0 - p).epsilon(1e-12));
    }

    // Independent of the order of retained draws.
    auto reversed = post;
    reversed.alpha = post.alpha.colwise().reverse();
    reversed.bias = post.bias.reverse();
    const auto x = row(d.X, 0);
    CHECK(predict_probability(reversed, x) == doctest::Approx(predict_probability(post, x)).epsilon(1e-12));

    const auto extreme = constant_posterior(5, 1, 1.0, 0.0);
    const double p_hi = predict_probability(extreme, std::vector<double>{800.0});
    const double p_lo = predict_probability(extreme, std::vector<double>{-800.0});
    CHECK(p_hi < 1.0);
    CHECK(p_lo > 0.0);
    CHECK_THROWS_AS(predict_probability(extreme, std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("input validation") {
    const auto d = logistic_data(20, {1.0}, 0.0, 15);
    CHECK_THROWS_AS(gibbs_fit(d.X, std::vector<int>(20, 1), quick(1, 5, 5)), DegenerateLabels);
    CHECK_THROWS_AS(gibbs_fit(d.X, std::vector<int>(19, 1), quick(1, 5, 5)), DimensionMismatch);
    auto bad = d.X;
    bad(3, 0) = NAN;
    CHECK_THROWS_AS(gibbs_fit(bad, d.y, quick(1, 5, 5)), NonFiniteInput);
    auto cfg = quick(1, 5, 0);
    CHECK_THROWS_AS(gibbs_fit(d.X, d.y, cfg), ValidationError);
}
