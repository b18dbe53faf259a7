#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "cpm/dataset.hpp"
#include "cpm/error.hpp"
#include "cpm/features.hpp"

using namespace cpm;

namespace {

std::vector<double> ramp(int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    std::iota(g.begin(), g.end(), 1.0);
    return g;
}

}  // namespace

TEST_CASE("raw window slices the leading gaps") {
    const auto g = ramp(100);
    const auto w = raw_window(g, 2, 10);
    CHECK(w.size() == 20);
    CHECK(w.front() == 1.0);
    CHECK(w.back() == 20.0);
    CHECK(raw_window(g, 1, 5) == std::vector<double>{1, 2, 3, 4, 5});
    CHECK_THROWS_AS(raw_window(g, 11, 10), WindowExceedsHorizon);
    CHECK_THROWS_AS(raw_window(g, 0, 10), ValidationError);
}

TEST_CASE("windows of successive models share their prefix") {
    const auto g = ramp(100);
    for (int m = 2; m <= 10; ++m) {
        const auto longer = raw_window(g, m, 10), shorter = raw_window(g, m - 1, 10);
        CHECK(std::equal(shorter.begin(), shorter.end(), longer.begin()));
    }
}

TEST_CASE("log-magnitude transform") {
    const std::vector<double> x{1e-3, 0.0, -1e-3};
    const auto t = transform(x, 1e-12);
    CHECK(t[0] == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(t[1] == -12.0);
    CHECK(t[2] == t[0]);
    CHECK_THROWS_AS(transform(std::vector<double>{NAN}, 1e-12), NonFiniteInput);
    CHECK_THROWS_AS(transform(std::vector<double>{INFINITY}, 1e-12), NonFiniteInput);
    CHECK(transform(x, 1e-12, FeatureMode::Raw) == x);
}

TEST_CASE("transform is monotone in magnitude and floored at log10(epsilon)") {
    auto rng = make_rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double a = std::pow(10.0, uniform(rng, -15, 2)), b = a * uniform(rng, 1.0, 3.0);
        const std::vector<double> x{a, -b};
        const auto t = transform(x, 1e-12);
        CHECK(t[0] <= t[1]);
        CHECK(t[0] >= -12.0);
    }
}

TEST_CASE("standardizer examples") {
    Eigen::MatrixXd constant(3, 1);
    constant << 4, 4, 4;
    const auto c = fit_standardizer(constant);
    CHECK(c.means[0] == 4.0);
    CHECK(c.stds[0] == 1.0);

    Eigen::MatrixXd two(2, 1);
    two << 0, 2;
    const auto s = fit_standardizer(two);
    CHECK(s.means[0] == 1.0);
    CHECK(s.stds[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.window_len == 1);
}

TEST_CASE("standardization round-trips and centres the training data") {
    auto rng = make_rng(5);
    Eigen::MatrixXd X(50, 8);
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X.cols(); ++j) X(i, j) = uniform(rng, -12, 1) * (j + 1);
    const auto ft = fit_standardizer(X);
    Eigen::MatrixXd Z = X;
    standardize_rows(Z, ft);
    for (int j = 0; j < Z.cols(); ++j) {
        CHECK(std::abs(Z.col(j).mean()) < 1e-12);
        CHECK(ft.stds[j] > 0);
    }
    for (int i = 0; i < X.rows(); ++i) {
        std::vector<double> row(8);
        for (int j = 0; j < 8; ++j) row[j] = X(i, j);
        const auto back = ft.unstandardize(ft.standardize(row));
        for (int j = 0; j < 8; ++j) CHECK(std::abs(back[j] - row[j]) <= 1e-12 * std::abs(row[j]) + 1e-300);
    }
}

TEST_CASE("featurize composes the pipeline") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data1, 20, 2));
    const auto& trace = ds.traces.front();
    const auto id = FeatureTransform::identity(30);
    CHECK(featurize(trace, 3, 10, id) == transform(raw_window(trace, 3, 10), kDefaultEpsilon));
    CHECK(featurize(trace, 3, 10, id) == featurize(trace, 3, 10, id));
    CHECK_THROWS_AS(featurize(trace, 2, 10, id), DimensionMismatch);
}

TEST_CASE("converged traces end near the tolerance floor") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data1, 40, 6));
    for (const auto& t : ds.traces) {
        if (t.label != 1) continue;
        const auto x = featurize(t, 10, 10, FeatureTransform::identity(100));
        REQUIRE(t.first_converged_iter.has_value());
        for (int k = *t.first_converged_iter; k < 100; ++k) {
            CHECK(x[k] < std::log10(t.market.tol));
            CHECK(x[k] >= -12.0);
        }
        CHECK(x.front() > x.back());
    }
}

TEST_CASE("transformed matrix rows match featurize") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data2, 10, 3));
    const auto X = transformed_matrix(ds.traces, 40, kDefaultEpsilon, FeatureMode::LogMagnitude);
    CHECK(X.rows() == 10);
    CHECK(X.cols() == 40);
    const auto id = FeatureTransform::identity(40);
    for (int i = 0; i < 10; ++i) {
        const auto f = featurize(ds.traces[i], 4, 10, id);
        for (int j = 0; j < 40; ++j) CHECK(X(i, j) == f[j]);
    }
}
