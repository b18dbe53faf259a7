#pragma once

#include <cstdint>
#include <vector>

#include "cpm/attack.hpp"
#include "cpm/market.hpp"

namespace cpm {

// Ranges for the per-trace prosumer draw.
//
// A prosumer set is kept only if its unconstrained equilibrium is strictly
// inside every prosumer's bounds and the linearised price iteration
// lambda <- lambda - rho * sum((c_i + lambda) / a_i) contracts with
// |1 - rho * sum(1 / a_i)| inside [contraction_min, contraction_max].
struct MarketRandomization {
    int n_prosumers = 3;
    double a_min = 0.5;
    double a_max = 2.0;
    double c_min = -2.0;
    double c_max = 2.0;
    double p_min = -5.0;
    double p_max = 5.0;
    double contraction_min = 0.75;
    double contraction_max = 0.86;

    void validate() const;
    bool operator==(const MarketRandomization&) const = default;
};

struct DatasetConfig {
    int n_traces = 2000;
    double attacked_fraction = 0.5;
    Protocol protocol = Protocol::Data1;
    MarketConfig market;  // rho, tol, horizon, lambda0; prosumers are drawn per trace
    MarketRandomization randomization;
    std::uint64_t master_seed = 0;

    void validate() const;
    int n_attacked() const;
    bool operator==(const DatasetConfig&) const = default;
};

DatasetConfig default_dataset_config(Protocol protocol, int n_traces, std::uint64_t seed);

struct Dataset {
    std::vector<NegotiationTrace> traces;
    DatasetConfig config;

    bool operator==(const Dataset&) const = default;
};

// Draws (a, c) for every prosumer; rejection-samples until the set satisfies
// the MarketRandomization constraints.
MarketConfig draw_market(const MarketConfig& base, const MarketRandomization& r, Rng& rng);

Dataset generate_dataset(const DatasetConfig& cfg, int jobs = 1);

struct TrainTestSplit {
    std::vector<NegotiationTrace> train;
    std::vector<NegotiationTrace> test;
};

// Stratified by label; each class contributes round(train_fraction * class size)
// training traces chosen by a seeded shuffle. Original order is kept within each part.
TrainTestSplit stratified_split(const std::vector<NegotiationTrace>& traces, double train_fraction,
                                std::uint64_t seed);

}  // namespace cpm
