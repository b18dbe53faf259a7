#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "cpm/dataset.hpp"
#include "cpm/error.hpp"
#include "cpm/market.hpp"

using namespace cpm;

namespace {

MarketConfig two_prosumers(double c1, double c2) {
    MarketConfig cfg;
    cfg.prosumers = {{0, 1.0, c1, -5.0, 5.0}, {1, 1.0, c2, -5.0, 5.0}};
    cfg.rho = 0.4;
    return cfg;
}

MarketConfig random_market(std::uint64_t seed) {
    auto rng = make_rng(seed);
    return draw_market(MarketConfig{}, MarketRandomization{}, rng);
}

}  // namespace

TEST_CASE("prosumer response examples") {
    CHECK(solve_prosumer_response({0, 1.0, 0.0, -1.0, 1.0}, 0.0) == 0.0);
    CHECK(solve_prosumer_response({0, 2.0, 1.0, -5.0, 5.0}, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(solve_prosumer_response({0, 1.0, 0.0, -1.0, 1.0}, 10.0) == 1.0);
    CHECK(oracle::grid_argmax(2.0, 1.0, 3.0, -5.0, 5.0, 1e-4) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("prosumer response agrees with grid search") {
    auto rng = make_rng(11);
    for (int t = 0; t < 50; ++t) {
        const ProsumerModel p{0, uniform(rng, 0.5, 2.0), uniform(rng, -2.0, 2.0), -1.0, 1.0};
        const double lambda = uniform(rng, -4.0, 4.0);
        CHECK(solve_prosumer_response(p, lambda) ==
              doctest::Approx(oracle::grid_argmax(p.a, p.c, lambda, p.p_min, p.p_max, 1e-4)).epsilon(2e-4));
    }
}

TEST_CASE("responses are monotone in the price and stay in bounds") {
    auto rng = make_rng(12);
    for (int t = 0; t < 1000; ++t) {
        const double lo = uniform(rng, -5.0, 0.0), hi = uniform(rng, 0.0, 5.0);
        const ProsumerModel p{0, uniform(rng, 0.1, 3.0), uniform(rng, -3.0, 3.0), lo, hi};
        const double l1 = uniform(rng, -10.0, 10.0), l2 = l1 + uniform(rng, 0.0, 5.0);
        const double r1 = solve_prosumer_response(p, l1), r2 = solve_prosumer_response(p, l2);
        CHECK(r1 <= r2);
        CHECK(r1 >= lo);
        CHECK(r1 <= hi);
    }
}

TEST_CASE("invalid prosumers are rejected") {
    auto cfg = two_prosumers(1.0, 0.0);
    cfg.prosumers[0].a = 0.0;
    CHECK_THROWS_AS(run_negotiation(cfg, std::nullopt, 1), ValidationError);
    cfg = two_prosumers(1.0, 0.0);
    cfg.prosumers[1].p_min = 2.0;
    cfg.prosumers[1].p_max = -2.0;
    CHECK_THROWS_AS(run_negotiation(cfg, std::nullopt, 1), ValidationError);
}

TEST_CASE("negotiation step examples") {
    const auto sym = negotiation_step(two_prosumers(1.0, -1.0), 0.0);
    CHECK(sym.gap == 0.0);
    CHECK(sym.lambda_next == 0.0);

    const auto step = negotiation_step(two_prosumers(1.0, 0.0), 0.0);
    CHECK(step.gap == doctest::Approx(1.0));
    CHECK(step.lambda_next == doctest::Approx(-0.4));
    REQUIRE(step.responses.size() == 2);
    CHECK(step.responses[0] == 1.0);
    CHECK(step.responses[1] == 0.0);
}

TEST_CASE("tampering shifts the reported gap by exactly the perturbation") {
    const auto cfg = random_market(3);
    for (double delta : {0.5, -0.25, 1e-3}) {
        const auto clean = negotiation_step(cfg, 0.7);
        const auto tampered = negotiation_step(cfg, 0.7, [delta](std::span<double> r) { r[1] += delta; });
        CHECK(tampered.reported_gap - clean.reported_gap == doctest::Approx(delta).epsilon(1e-12));
        CHECK(tampered.gap == clean.gap);
        CHECK(tampered.lambda_next == doctest::Approx(clean.lambda_next - cfg.rho * delta));
    }
}

TEST_CASE("sustained convergence") {
    const std::vector<double> g{1.0, 1e-6, 1.0, 1e-6, -1e-7, 0.0};
    CHECK(sustained_convergence(g, 1e-5) == 3);
    const std::vector<double> late{1e-6, 1e-6, 1.0};
    CHECK_FALSE(sustained_convergence(late, 1e-5).has_value());
    const std::vector<double> always{1e-6, 1e-6};
    CHECK(sustained_convergence(always, 1e-5) == 0);
}

TEST_CASE("default market converges and matches the linear fixed-point iteration") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto cfg = random_market(seed);
        const auto trace = run_negotiation(cfg, std::nullopt, seed);
        REQUIRE(trace.gaps.size() == 100);
        CHECK(trace.converged);
        REQUIRE(trace.first_converged_iter.has_value());
        CHECK(*trace.first_converged_iter <= 100);
        CHECK(std::abs(trace.gaps.back()) < 1e-5);
        CHECK(trace.label == 1);

        // Equilibria are box-interior, so once every response is unclamped the
        // trace follows the unconstrained map exactly.
        std::vector<double> a, c;
        for (const auto& p : cfg.prosumers) {
            a.push_back(p.a);
            c.push_back(p.c);
        }
        const auto lin = oracle::linear_dual_ascent(a, c, cfg.rho, cfg.lambda0, cfg.horizon);
        bool clamped = false;
        double lambda = cfg.lambda0;
        for (int k = 0; k < cfg.horizon; ++k) {
            const auto step = negotiation_step(cfg, lambda);
            for (std::size_t i = 0; i < a.size(); ++i)
                if (step.responses[i] == cfg.prosumers[i].p_min || step.responses[i] == cfg.prosumers[i].p_max)
                    clamped = true;
            lambda = step.lambda_next;
        }
        if (!clamped) {
            for (int k = 0; k < cfg.horizon; ++k) CHECK(trace.gaps[k] == doctest::Approx(lin[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("gap magnitude is non-increasing while no response is clamped") {
    for (std::uint64_t seed = 200; seed < 300; ++seed) {
        const auto cfg = random_market(seed);
        double lambda = cfg.lambda0;
        std::vector<StepResult> steps;
        for (int k = 0; k < cfg.horizon; ++k) {
            steps.push_back(negotiation_step(cfg, lambda));
            lambda = steps.back().lambda_next;
        }
        auto interior = [&](const StepResult& s) {
            for (std::size_t i = 0; i < s.responses.size(); ++i)
                if (s.responses[i] <= cfg.prosumers[i].p_min || s.responses[i] >= cfg.prosumers[i].p_max)
                    return false;
            return true;
        };
        for (int k = 0; k + 1 < cfg.horizon; ++k)
            if (interior(steps[k]) && interior(steps[k + 1]))
                CHECK(std::abs(steps[k + 1].gap) <= std::abs(steps[k].gap) + 1e-14);
    }
}

TEST_CASE("gap is bounded by the sum of the widest bounds") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto cfg = random_market(seed);
        double bound = 0.0;
        for (const auto& p : cfg.prosumers) bound += std::max(std::abs(p.p_min), std::abs(p.p_max));
        AttackSpec atk{0, 0, AttackKind::Scale, 1.5, 0};
        const auto trace = run_negotiation(cfg, atk, seed);
        for (double g : trace.gaps) CHECK(std::abs(g) <= bound);
    }
}

TEST_CASE("a constant bias keeps the market from converging") {
    const auto cfg = random_market(5);
    const AttackSpec atk{0, 0, AttackKind::Bias, 0.5, 0};
    const auto trace = run_negotiation(cfg, atk, 5);
    CHECK_FALSE(trace.converged);
    CHECK(trace.label == 0);
    // The price settles where the reported gap vanishes, leaving a physical
    // residual of -delta.
    CHECK(trace.gaps.back() == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("negotiation is deterministic") {
    const auto cfg = random_market(9);
    const AttackSpec atk{2, 10, AttackKind::Noise, 0.3, 1234};
    CHECK(run_negotiation(cfg, atk, 9) == run_negotiation(cfg, atk, 9));
    CHECK(run_negotiation(cfg, std::nullopt, 9) == run_negotiation(cfg, std::nullopt, 9));
}

TEST_CASE("non-finite gaps are reported") {
    MarketConfig cfg;
    cfg.prosumers = {{0, 1e-10, 1.0, -1.7e308, 1.7e308}, {1, 1e-10, 1.0, -1.7e308, 1.7e308}};
    cfg.lambda0 = 1e300;
    CHECK_THROWS_AS(run_negotiation(cfg, std::nullopt, 1), NonFiniteGap);
}
