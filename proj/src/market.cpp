#include "cpm/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpm/error.hpp"

namespace cpm {

void ProsumerModel::validate() const {
    if (!(a > 0.0) || !std::isfinite(a))
        throw ValidationError("prosumer " + std::to_string(id) + ": a must be > 0");
    if (!std::isfinite(c)) throw ValidationError("prosumer " + std::to_string(id) + ": c must be finite");
    if (!(p_min <= p_max))
        throw ValidationError("prosumer " + std::to_string(id) + ": p_min must be <= p_max");
}

void MarketConfig::validate() const {
    if (prosumers.size() < 2) throw ValidationError("market needs at least 2 prosumers");
    for (const auto& p : prosumers) p.validate();
    if (!(rho > 0.0)) throw ValidationError("rho must be > 0");
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    if (!std::isfinite(lambda0)) throw ValidationError("lambda0 must be finite");
}

double solve_prosumer_response(const ProsumerModel& p, double lambda) {
    return std::clamp((p.c + lambda) / p.a, p.p_min, p.p_max);
}

StepResult negotiation_step(const MarketConfig& cfg, double lambda, const Tamper& tamper) {
    StepResult out;
    out.responses.reserve(cfg.prosumers.size());
    for (const auto& p : cfg.prosumers) out.responses.push_back(solve_prosumer_response(p, lambda));
    out.reported = out.responses;
    if (tamper) tamper(out.reported);
    for (std::size_t i = 0; i < out.responses.size(); ++i) {
        out.gap += out.responses[i];
        out.reported_gap += out.reported[i];
    }
    out.lambda_next = lambda - cfg.rho * out.reported_gap;
    return out;
}

std::optional<int> sustained_convergence(std::span<const double> gaps, double tol) {
    std::optional<int> first;
    for (int k = static_cast<int>(gaps.size()) - 1; k >= 0; --k) {
        if (!(std::abs(gaps[static_cast<std::size_t>(k)]) < tol)) break;
        first = k;
    }
    return first;
}

NegotiationTrace run_negotiation(const MarketConfig& cfg, const std::optional<AttackSpec>& attack,
                                 std::uint64_t seed) {
    cfg.validate();
    std::optional<AttackInjector> injector;
    if (attack) {
        attack->validate(cfg.horizon);
        if (attack->target >= static_cast<int>(cfg.prosumers.size()))
            throw TargetOutOfRange("attack target " + std::to_string(attack->target) + " with " +
                                   std::to_string(cfg.prosumers.size()) + " prosumers");
        injector.emplace(*attack);
    }

    NegotiationTrace trace;
    trace.trace_id = "trace-" + std::to_string(seed);
    trace.seed = seed;
    trace.market = cfg;
    trace.attack = attack;
    trace.label = attack ? 0 : 1;
    trace.gaps.reserve(static_cast<std::size_t>(cfg.horizon));

    double lambda = cfg.lambda0;
    for (int k = 0; k < cfg.horizon; ++k) {
        Tamper tamper;
        if (injector) tamper = [&injector, k](std::span<double> r) { injector->apply(k, r); };
        const StepResult step = negotiation_step(cfg, lambda, tamper);
        if (!std::isfinite(step.gap) || !std::isfinite(step.reported_gap) ||
            !std::isfinite(step.lambda_next))
            throw NonFiniteGap("iteration " + std::to_string(k) + " (rho=" + std::to_string(cfg.rho) +
                               " too large?)");
        trace.gaps.push_back(step.gap);
        lambda = step.lambda_next;
    }
    trace.first_converged_iter = sustained_convergence(trace.gaps, cfg.tol);
    trace.converged = trace.first_converged_iter.has_value();
    return trace;
}

}  // namespace cpm
