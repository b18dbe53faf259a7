#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpm/ensemble.hpp"

namespace cpm {

// Positive class is label 1 (safe / converging).
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> preds, std::span<const int> labels);

struct FalseRates {
    double fpr = 0.0;  // attacked traces passed as safe
    double fnr = 0.0;  // safe traces flagged (premature termination)
};

FalseRates fpr_fnr(const ConfusionCounts& c);

double mcc(const ConfusionCounts& c);

struct MetricsCell {
    int delta_w = 0;
    int span = 0;
    ConfusionCounts counts;
    double fpr = 0.0;
    double fnr = 0.0;
    double mcc = 0.0;

    static MetricsCell from_counts(int delta_w, int span, const ConfusionCounts& counts);
    bool operator==(const MetricsCell&) const = default;
};

struct MetricsReport {
    std::vector<MetricsCell> cells;  // ordered by (delta_w, span)
    std::string dataset_id;
    std::string fingerprint;

    const MetricsCell* find(int delta_w, int span) const;
    bool operator==(const MetricsReport&) const = default;
};

std::vector<int> labels_of(std::span<const NegotiationTrace> traces);

// Decisions of model m for every trace.
std::vector<int> predictions(const CpmEnsemble& ens, std::span<const NegotiationTrace> traces, int m);

// One cell per model m, span = m * delta_w.
MetricsReport evaluate_ensemble(const CpmEnsemble& ens, std::span<const NegotiationTrace> test);

struct SweepResult {
    MetricsReport report;
    std::vector<CpmEnsemble> ensembles;  // one per delta_w, reaching its largest valid span
};

// For each (delta_w, span) with span % delta_w == 0, classifies the test set
// with the final model of an ensemble reaching that span. Shorter ensembles
// for the same delta_w are prefixes of the longest one, so each delta_w is
// fitted once.
SweepResult sweep(std::span<const NegotiationTrace> train, std::span<const NegotiationTrace> test,
                  std::span<const int> delta_ws, std::span<const int> spans, const CpmConfig& base,
                  int jobs = 1);

struct FalsePositiveRecord {
    std::string trace_id;
    double min_abs_gap = 0.0;
    double gap_variability = 0.0;  // max - min of |gap| from the attack start onwards
    AttackSpec attack;
    double p_final = 0.0;

    bool operator==(const FalsePositiveRecord&) const = default;
};

// Attacked traces that the final model classifies as safe.
std::vector<FalsePositiveRecord> false_positive_report(const CpmEnsemble& ens,
                                                       std::span<const NegotiationTrace> test);

}  // namespace cpm
