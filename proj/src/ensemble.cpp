#include "cpm/ensemble.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>

#include "cpm/error.hpp"

namespace cpm {

void CpmConfig::validate() const {
    if (delta_w < 1) throw ValidationError("cpm.delta_w must be >= 1");
    if (n_models < 1) throw ValidationError("cpm.n_models must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("cpm.threshold must be in (0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("cpm.epsilon must be > 0");
    sampler.validate();
}

void CpmEnsemble::validate() const {
    config.validate();
    if (static_cast<int>(models.size()) != config.n_models)
        throw DimensionMismatch("ensemble has " + std::to_string(models.size()) + " models, config says " +
                                std::to_string(config.n_models));
    for (std::size_t i = 0; i < models.size(); ++i) {
        models[i].validate();
        const int expect = static_cast<int>(i + 1) * config.delta_w;
        if (models[i].window_len != expect)
            throw DimensionMismatch("model " + std::to_string(i + 1) + " has window " +
                                    std::to_string(models[i].window_len) + ", expected " + std::to_string(expect));
    }
}

std::uint64_t model_seed(const SamplerConfig& sampler, int m) {
    return derive_seed(sampler.seed, static_cast<std::uint64_t>(m));
}

BlrPosterior fit_window_model(std::span<const NegotiationTrace> train, int window_len, const CpmConfig& cfg,
                              std::uint64_t seed) {
    for (const auto& t : train)
        if (static_cast<int>(t.gaps.size()) < window_len)
            throw WindowExceedsHorizon("trace " + t.trace_id + " has " + std::to_string(t.gaps.size()) +
                                       " gaps, window needs " + std::to_string(window_len));
    Eigen::MatrixXd X = transformed_matrix(train, window_len, cfg.epsilon, cfg.feature_mode);
    FeatureTransform ft = fit_standardizer(X, cfg.epsilon, cfg.feature_mode);
    standardize_rows(X, ft);

    std::vector<int> y;
    y.reserve(train.size());
    for (const auto& t : train) y.push_back(t.label);

    SamplerConfig sc = cfg.sampler;
    sc.seed = seed;
    BlrPosterior post = gibbs_fit(X, y, sc);
    post.transform = std::move(ft);
    return post;
}

CpmEnsemble fit_cpm(std::span<const NegotiationTrace> train, const CpmConfig& cfg, int jobs) {
    cfg.validate();
    if (train.size() < 2) throw ValidationError("fit_cpm needs at least 2 training traces");
    const int m_total = cfg.n_models;

    CpmEnsemble ens;
    ens.config = cfg;
    ens.models.resize(static_cast<std::size_t>(m_total));

    auto fit_one = [&](int m) {
        ens.models[static_cast<std::size_t>(m - 1)] =
            fit_window_model(train, m * cfg.delta_w, cfg, model_seed(cfg.sampler, m));
    };

    jobs = std::clamp(jobs, 1, m_total);
    if (jobs == 1) {
        for (int m = 1; m <= m_total; ++m) fit_one(m);
        return ens;
    }
    // Longest windows first so the slowest fits start early.
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int m = m_total - w; m >= 1; m -= jobs) fit_one(m);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return ens;
}

CpmEnsemble truncate_ensemble(const CpmEnsemble& ens, int n_models) {
    if (n_models < 1 || n_models > static_cast<int>(ens.models.size()))
        throw ValidationError("cannot truncate a " + std::to_string(ens.models.size()) + "-model ensemble to " +
                              std::to_string(n_models));
    CpmEnsemble out;
    out.config = ens.config;
    out.config.n_models = n_models;
    out.models.assign(ens.models.begin(), ens.models.begin() + n_models);
    return out;
}

double model_probability(const CpmEnsemble& ens, std::span<const double> gaps, int m) {
    if (m < 1 || m > static_cast<int>(ens.models.size()))
        throw ValidationError("model index " + std::to_string(m) + " outside 1.." + std::to_string(ens.models.size()));
    const BlrPosterior& post = ens.models[static_cast<std::size_t>(m - 1)];
    const auto x = featurize(gaps, m, ens.config.delta_w, post.transform);
    return predict_probability(post, x);
}

std::vector<double> probability_sequence(const CpmEnsemble& ens, std::span<const double> gaps) {
    const int m_total = static_cast<int>(ens.models.size());
    if (static_cast<int>(gaps.size()) < m_total * ens.config.delta_w)
        throw DimensionMismatch("trace has " + std::to_string(gaps.size()) + " gaps, ensemble span is " +
                                std::to_string(m_total * ens.config.delta_w));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m_total));
    for (int m = 1; m <= m_total; ++m) out.push_back(model_probability(ens, gaps, m));
    return out;
}

std::vector<double> probability_sequence(const CpmEnsemble& ens, const NegotiationTrace& trace) {
    return probability_sequence(ens, std::span<const double>(trace.gaps));
}

int decide(double probability, double threshold) { return probability >= threshold ? 1 : 0; }

int classify(const CpmEnsemble& ens, const NegotiationTrace& trace, int m) {
    return decide(model_probability(ens, trace.gaps, m), ens.config.threshold);
}

std::optional<StreamingPredictor::Emission> StreamingPredictor::push(double gap) {
    gaps_.push_back(gap);
    if (next_m_ > static_cast<int>(ens_.models.size())) return std::nullopt;
    const int needed = next_m_ * ens_.config.delta_w;
    if (static_cast<int>(gaps_.size()) < needed) return std::nullopt;
    const double p = model_probability(ens_, gaps_, next_m_);
    Emission e{next_m_, needed, p, decide(p, ens_.config.threshold)};
    ++next_m_;
    return e;
}

}  // namespace cpm
