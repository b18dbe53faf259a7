#include "cpm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "cpm/error.hpp"

namespace cpm {

namespace {

// Fisher-Yates on top of uniform_int so the permutation is library independent.
template <class T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

std::string trace_name(int index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return "t" + digits;
}

}  // namespace

void MarketRandomization::validate() const {
    if (n_prosumers < 2) throw ValidationError("randomization.n_prosumers must be >= 2");
    if (!(a_min > 0.0 && a_min <= a_max)) throw ValidationError("randomization needs 0 < a_min <= a_max");
    if (!(c_min <= c_max)) throw ValidationError("randomization needs c_min <= c_max");
    if (!(p_min < p_max)) throw ValidationError("randomization needs p_min < p_max");
    if (!(contraction_min >= 0.0 && contraction_min <= contraction_max && contraction_max < 1.0))
        throw ValidationError("randomization needs 0 <= contraction_min <= contraction_max < 1");
}

void DatasetConfig::validate() const {
    if (n_traces < 1) throw ValidationError("dataset.n_traces must be >= 1");
    if (!(attacked_fraction >= 0.0 && attacked_fraction <= 1.0))
        throw ValidationError("dataset.attacked_fraction must be in [0, 1]");
    if (!(market.rho > 0.0)) throw ValidationError("market.rho must be > 0");
    if (!(market.tol > 0.0)) throw ValidationError("market.tol must be > 0");
    if (market.horizon < 1) throw ValidationError("market.horizon must be >= 1");
    if (protocol == Protocol::Data2 && attacked_fraction > 0.0 && market.horizon <= kData2StartMax)
        throw ValidationError("data2 needs market.horizon > " + std::to_string(kData2StartMax));
    randomization.validate();
}

int DatasetConfig::n_attacked() const {
    return static_cast<int>(std::lround(static_cast<double>(n_traces) * attacked_fraction));
}

DatasetConfig default_dataset_config(Protocol protocol, int n_traces, std::uint64_t seed) {
    DatasetConfig cfg;
    cfg.protocol = protocol;
    cfg.n_traces = n_traces;
    cfg.master_seed = seed;
    return cfg;
}

MarketConfig draw_market(const MarketConfig& base, const MarketRandomization& r, Rng& rng) {
    MarketConfig cfg = base;
    cfg.prosumers.resize(static_cast<std::size_t>(r.n_prosumers));
    constexpr int kMaxAttempts = 1'000'000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        double inv_a = 0.0;
        double c_over_a = 0.0;
        for (int i = 0; i < r.n_prosumers; ++i) {
            auto& p = cfg.prosumers[static_cast<std::size_t>(i)];
            p.id = i;
            p.a = uniform(rng, r.a_min, r.a_max);
            p.c = uniform(rng, r.c_min, r.c_max);
            p.p_min = r.p_min;
            p.p_max = r.p_max;
            inv_a += 1.0 / p.a;
            c_over_a += p.c / p.a;
        }
        const double contraction = std::abs(1.0 - cfg.rho * inv_a);
        if (contraction < r.contraction_min || contraction > r.contraction_max) continue;
        const double lambda_star = -c_over_a / inv_a;
        const bool interior = std::all_of(cfg.prosumers.begin(), cfg.prosumers.end(), [&](const ProsumerModel& p) {
            const double eq = (p.c + lambda_star) / p.a;
            return eq > p.p_min && eq < p.p_max;
        });
        if (interior) return cfg;
    }
    throw ValidationError("market randomization constraints unsatisfiable (no draw accepted in " +
                          std::to_string(kMaxAttempts) + " attempts)");
}

Dataset generate_dataset(const DatasetConfig& cfg, int jobs) {
    cfg.validate();
    const int n = cfg.n_traces;

    std::vector<char> attacked(static_cast<std::size_t>(n), 0);
    {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        Rng rng = make_rng(derive_seed(cfg.master_seed, 0xA77AC4ULL));
        seeded_shuffle(order, rng);
        for (int i = 0; i < cfg.n_attacked(); ++i) attacked[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }

    Dataset out;
    out.config = cfg;
    out.traces.resize(static_cast<std::size_t>(n));

    auto make_trace = [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(seed);
        const MarketConfig market = draw_market(cfg.market, cfg.randomization, rng);
        std::optional<AttackSpec> attack;
        if (attacked[static_cast<std::size_t>(i)])
            attack = draw_attack_spec(cfg.protocol, cfg.randomization.n_prosumers, derive_seed(seed, 1));
        try {
            NegotiationTrace t = run_negotiation(market, attack, seed);
            t.trace_id = trace_name(i);
            out.traces[static_cast<std::size_t>(i)] = std::move(t);
        } catch (const NonFiniteGap& e) {
            throw NonFiniteGap("trace " + std::to_string(i) + ": " + e.what());
        }
    };

    jobs = std::clamp(jobs, 1, std::max(1, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) make_trace(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += jobs) make_trace(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

TrainTestSplit stratified_split(const std::vector<NegotiationTrace>& traces, double train_fraction,
                                std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must be in (0, 1)");
    std::vector<char> in_train(traces.size(), 0);
    for (int label = 0; label <= 1; ++label) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < traces.size(); ++i)
            if (traces[i].label == label) idx.push_back(i);
        Rng rng = make_rng(derive_seed(seed, 0x5B117ULL + static_cast<std::uint64_t>(label)));
        seeded_shuffle(idx, rng);
        const auto k = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
        for (std::size_t j = 0; j < k; ++j) in_train[idx[j]] = 1;
    }
    TrainTestSplit split;
    for (std::size_t i = 0; i < traces.size(); ++i) (in_train[i] ? split.train : split.test).push_back(traces[i]);
    return split;
}

}  // namespace cpm
