#include "cpm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpm/error.hpp"

namespace cpm {

ConfusionCounts confusion(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size())
        throw LengthMismatch(std::to_string(preds.size()) + " predictions for " + std::to_string(labels.size()) +
                             " labels");
    if (preds.empty()) throw LengthMismatch("confusion needs at least one prediction");
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] != 0;
        const bool l = labels[i] != 0;
        if (p && l) ++c.tp;
        else if (p) ++c.fp;
        else if (l) ++c.fn;
        else ++c.tn;
    }
    return c;
}

FalseRates fpr_fnr(const ConfusionCounts& c) {
    FalseRates r;
    if (c.fp + c.tn > 0) r.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    if (c.fn + c.tp > 0) r.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
    return r;
}

double mcc(const ConfusionCounts& c) {
    const std::uint64_t pp = c.tp + c.fp, ap = c.tp + c.fn, an = c.tn + c.fp, pn = c.tn + c.fn;
    if (pp == 0 || ap == 0 || an == 0 || pn == 0) return 0.0;
    const __int128 num = static_cast<__int128>(c.tp) * c.tn - static_cast<__int128>(c.fp) * c.fn;
    // Each pairwise product fits exactly in a double for counts up to ~9e7.
    const long double den = std::sqrt(static_cast<long double>(pp) * ap) * std::sqrt(static_cast<long double>(an) * pn);
    const double v = static_cast<double>(static_cast<long double>(num) / den);
    return std::clamp(v, -1.0, 1.0);
}

MetricsCell MetricsCell::from_counts(int delta_w, int span, const ConfusionCounts& counts) {
    MetricsCell cell;
    cell.delta_w = delta_w;
    cell.span = span;
    cell.counts = counts;
    const FalseRates r = fpr_fnr(counts);
    cell.fpr = r.fpr;
    cell.fnr = r.fnr;
    cell.mcc = cpm::mcc(counts);
    return cell;
}

const MetricsCell* MetricsReport::find(int delta_w, int span) const {
    for (const auto& c : cells)
        if (c.delta_w == delta_w && c.span == span) return &c;
    return nullptr;
}

std::vector<int> labels_of(std::span<const NegotiationTrace> traces) {
    std::vector<int> y;
    y.reserve(traces.size());
    for (const auto& t : traces) y.push_back(t.label);
    return y;
}

std::vector<int> predictions(const CpmEnsemble& ens, std::span<const NegotiationTrace> traces, int m) {
    std::vector<int> out;
    out.reserve(traces.size());
    for (const auto& t : traces) out.push_back(classify(ens, t, m));
    return out;
}

MetricsReport evaluate_ensemble(const CpmEnsemble& ens, std::span<const NegotiationTrace> test) {
    const auto labels = labels_of(test);
    MetricsReport report;
    for (int m = 1; m <= static_cast<int>(ens.models.size()); ++m) {
        const auto preds = predictions(ens, test, m);
        report.cells.push_back(
            MetricsCell::from_counts(ens.config.delta_w, m * ens.config.delta_w, confusion(preds, labels)));
    }
    return report;
}

SweepResult sweep(std::span<const NegotiationTrace> train, std::span<const NegotiationTrace> test,
                  std::span<const int> delta_ws, std::span<const int> spans, const CpmConfig& base, int jobs) {
    if (delta_ws.empty() || spans.empty()) throw ValidationError("sweep needs at least one delta_w and one span");
    std::vector<int> dws(delta_ws.begin(), delta_ws.end());
    std::vector<int> sps(spans.begin(), spans.end());
    std::sort(dws.begin(), dws.end());
    dws.erase(std::unique(dws.begin(), dws.end()), dws.end());
    std::sort(sps.begin(), sps.end());
    sps.erase(std::unique(sps.begin(), sps.end()), sps.end());
    for (int dw : dws)
        if (dw < 1) throw ValidationError("sweep delta_w values must be >= 1");
    for (int s : sps)
        if (s < 1) throw ValidationError("sweep spans must be >= 1");

    const auto labels = labels_of(test);
    SweepResult result;
    for (int dw : dws) {
        int max_span = 0;
        for (int s : sps)
            if (s % dw == 0) max_span = std::max(max_span, s);
        if (max_span == 0) continue;

        CpmConfig cfg = base;
        cfg.delta_w = dw;
        cfg.n_models = max_span / dw;
        CpmEnsemble ens;
        try {
            ens = fit_cpm(train, cfg, jobs);
        } catch (const Error& e) {
            throw ComputationError("sweep delta_w=" + std::to_string(dw) + " span=" + std::to_string(max_span) +
                                   ": " + e.what());
        }
        for (int s : sps) {
            if (s % dw != 0) continue;
            const auto preds = predictions(ens, test, s / dw);
            result.report.cells.push_back(MetricsCell::from_counts(dw, s, confusion(preds, labels)));
        }
        result.ensembles.push_back(std::move(ens));
    }
    return result;
}

std::vector<FalsePositiveRecord> false_positive_report(const CpmEnsemble& ens,
                                                       std::span<const NegotiationTrace> test) {
    std::vector<FalsePositiveRecord> out;
    const int m = static_cast<int>(ens.models.size());
    for (const auto& t : test) {
        if (t.label != 0) continue;
        const double p = model_probability(ens, t.gaps, m);
        if (decide(p, ens.config.threshold) != 1) continue;

        FalsePositiveRecord r;
        r.trace_id = t.trace_id;
        r.p_final = p;
        if (t.attack) r.attack = *t.attack;
        r.min_abs_gap = std::numeric_limits<double>::infinity();
        for (double g : t.gaps) r.min_abs_gap = std::min(r.min_abs_gap, std::abs(g));
        const std::size_t start = t.attack ? static_cast<std::size_t>(t.attack->start_iter) : 0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t k = start; k < t.gaps.size(); ++k) {
            lo = std::min(lo, std::abs(t.gaps[k]));
            hi = std::max(hi, std::abs(t.gaps[k]));
        }
        r.gap_variability = start < t.gaps.size() ? hi - lo : 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cpm
