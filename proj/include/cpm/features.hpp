#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cpm/market.hpp"

namespace cpm {

enum class FeatureMode {
    LogMagnitude,  // log10(|gap| + epsilon)
    Raw,           // signed gap, untransformed
};

std::string_view to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(std::string_view name);

inline constexpr double kDefaultEpsilon = 1e-12;

// Per-position standardiser for one window length, fitted on training data.
struct FeatureTransform {
    double epsilon = kDefaultEpsilon;
    FeatureMode mode = FeatureMode::LogMagnitude;
    std::vector<double> means;
    std::vector<double> stds;
    int window_len = 0;

    void validate() const;

    // Means 0, stds 1.
    static FeatureTransform identity(int window_len, double epsilon = kDefaultEpsilon,
                                     FeatureMode mode = FeatureMode::LogMagnitude);

    std::vector<double> standardize(std::span<const double> transformed) const;
    std::vector<double> unstandardize(std::span<const double> standardized) const;

    bool operator==(const FeatureTransform&) const = default;
};

// gaps[0 .. m*delta_w - 1].
std::vector<double> raw_window(const NegotiationTrace& trace, int m, int delta_w);
std::vector<double> raw_window(std::span<const double> gaps, int m, int delta_w);

std::vector<double> transform(std::span<const double> x_raw, double epsilon,
                              FeatureMode mode = FeatureMode::LogMagnitude);

// Columns with std < 1e-12 get std 1.
FeatureTransform fit_standardizer(const Eigen::MatrixXd& X, double epsilon = kDefaultEpsilon,
                                  FeatureMode mode = FeatureMode::LogMagnitude);

std::vector<double> featurize(const NegotiationTrace& trace, int m, int delta_w, const FeatureTransform& ft);
std::vector<double> featurize(std::span<const double> gaps, int m, int delta_w, const FeatureTransform& ft);

// Transformed (not standardised) features, one row per trace, first window_len gaps.
Eigen::MatrixXd transformed_matrix(std::span<const NegotiationTrace> traces, int window_len, double epsilon,
                                   FeatureMode mode);

// Standardises each row of a transformed matrix in place.
void standardize_rows(Eigen::MatrixXd& X, const FeatureTransform& ft);

}  // namespace cpm
