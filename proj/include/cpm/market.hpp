#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpm/attack.hpp"

namespace cpm {

// Local objective -0.5*a*p^2 + c*p + lambda*p on [p_min, p_max].
struct ProsumerModel {
    int id = 0;
    double a = 1.0;
    double c = 0.0;
    double p_min = -5.0;
    double p_max = 5.0;

    void validate() const;
    bool operator==(const ProsumerModel&) const = default;
};

struct MarketConfig {
    std::vector<ProsumerModel> prosumers;
    double rho = 0.4;
    double tol = 1e-5;
    int horizon = 100;
    double lambda0 = 0.0;

    void validate() const;
    bool operator==(const MarketConfig&) const = default;
};

struct NegotiationTrace {
    std::string trace_id;
    std::vector<double> gaps;
    bool converged = false;
    std::optional<int> first_converged_iter;
    int label = 1;  // 1 = safe, 0 = attacked
    std::optional<AttackSpec> attack;
    std::uint64_t seed = 0;
    MarketConfig market;

    bool operator==(const NegotiationTrace&) const = default;
};

double solve_prosumer_response(const ProsumerModel& p, double lambda);

// In-place perturbation of the reported responses.
using Tamper = std::function<void(std::span<double>)>;

struct StepResult {
    double gap = 0.0;           // physical balance: sum of true responses
    double reported_gap = 0.0;  // sum of reported responses, drives the price
    double lambda_next = 0.0;
    std::vector<double> responses;
    std::vector<double> reported;
};

StepResult negotiation_step(const MarketConfig& cfg, double lambda, const Tamper& tamper = {});

// Index of the first iteration from which |gap| < tol holds to the end.
std::optional<int> sustained_convergence(std::span<const double> gaps, double tol);

NegotiationTrace run_negotiation(const MarketConfig& cfg, const std::optional<AttackSpec>& attack,
                                 std::uint64_t seed);

}  // namespace cpm
