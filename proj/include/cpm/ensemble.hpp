#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cpm/blr.hpp"
#include "cpm/features.hpp"
#include "cpm/market.hpp"

namespace cpm {

struct CpmConfig {
    int delta_w = 10;
    int n_models = 10;
    SamplerConfig sampler;
    double threshold = 0.5;
    FeatureMode feature_mode = FeatureMode::LogMagnitude;
    double epsilon = kDefaultEpsilon;

    int span() const { return delta_w * n_models; }
    void validate() const;
    bool operator==(const CpmConfig&) const = default;
};

// models[m-1] sees the first m * delta_w gaps.
struct CpmEnsemble {
    std::vector<BlrPosterior> models;
    CpmConfig config;

    void validate() const;
    bool operator==(const CpmEnsemble&) const = default;
};

// Seed of the m-th model's chain (m is 1-based).
std::uint64_t model_seed(const SamplerConfig& sampler, int m);

// Fits one window-length model on the training traces.
BlrPosterior fit_window_model(std::span<const NegotiationTrace> train, int window_len, const CpmConfig& cfg,
                              std::uint64_t seed);

// Fits all M models. Independent fits run on up to `jobs` threads; the
// result does not depend on `jobs`.
CpmEnsemble fit_cpm(std::span<const NegotiationTrace> train, const CpmConfig& cfg, int jobs = 1);

// The first `n_models` models of `ens`, identical to fitting that shorter ensemble.
CpmEnsemble truncate_ensemble(const CpmEnsemble& ens, int n_models);

std::vector<double> probability_sequence(const CpmEnsemble& ens, std::span<const double> gaps);
std::vector<double> probability_sequence(const CpmEnsemble& ens, const NegotiationTrace& trace);

double model_probability(const CpmEnsemble& ens, std::span<const double> gaps, int m);

// 1 (safe) iff P_m >= threshold.
int decide(double probability, double threshold);
int classify(const CpmEnsemble& ens, const NegotiationTrace& trace, int m);

// Consumes gaps one iteration at a time, as during a live negotiation, and
// emits P_m as soon as the m-th window is complete.
class StreamingPredictor {
public:
    struct Emission {
        int m;
        int iteration;  // m * delta_w
        double probability;
        int decision;
    };

    explicit StreamingPredictor(const CpmEnsemble& ens) : ens_(ens) {}

    std::optional<Emission> push(double gap);
    int next_model() const { return next_m_; }

private:
    const CpmEnsemble& ens_;
    std::vector<double> gaps_;
    int next_m_ = 1;
};

}  // namespace cpm
