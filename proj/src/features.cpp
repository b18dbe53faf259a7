#include "cpm/features.hpp"

#include <cmath>
#include <string>

#include "cpm/error.hpp"

namespace cpm {

std::string_view to_string(FeatureMode mode) { return mode == FeatureMode::Raw ? "raw" : "log"; }

FeatureMode feature_mode_from_string(std::string_view name) {
    if (name == "log") return FeatureMode::LogMagnitude;
    if (name == "raw") return FeatureMode::Raw;
    throw ValidationError("unknown feature mode '" + std::string(name) + "' (expected log or raw)");
}

void FeatureTransform::validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("feature epsilon must be > 0");
    if (window_len < 1) throw ValidationError("feature window_len must be >= 1");
    if (means.size() != static_cast<std::size_t>(window_len) || stds.size() != static_cast<std::size_t>(window_len))
        throw DimensionMismatch("standardiser has " + std::to_string(means.size()) + " means and " +
                                std::to_string(stds.size()) + " stds for window " + std::to_string(window_len));
    for (double s : stds)
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("standardiser stds must be positive");
}

FeatureTransform FeatureTransform::identity(int window_len, double epsilon, FeatureMode mode) {
    FeatureTransform ft;
    ft.epsilon = epsilon;
    ft.mode = mode;
    ft.window_len = window_len;
    ft.means.assign(static_cast<std::size_t>(window_len), 0.0);
    ft.stds.assign(static_cast<std::size_t>(window_len), 1.0);
    return ft;
}

std::vector<double> FeatureTransform::standardize(std::span<const double> transformed) const {
    if (transformed.size() != means.size())
        throw DimensionMismatch("feature vector of length " + std::to_string(transformed.size()) +
                                " for window " + std::to_string(window_len));
    std::vector<double> out(transformed.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (transformed[j] - means[j]) / stds[j];
    return out;
}

std::vector<double> FeatureTransform::unstandardize(std::span<const double> standardized) const {
    if (standardized.size() != means.size())
        throw DimensionMismatch("feature vector of length " + std::to_string(standardized.size()) +
                                " for window " + std::to_string(window_len));
    std::vector<double> out(standardized.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = standardized[j] * stds[j] + means[j];
    return out;
}

std::vector<double> raw_window(std::span<const double> gaps, int m, int delta_w) {
    if (m < 1 || delta_w < 1) throw ValidationError("raw_window needs m >= 1 and delta_w >= 1");
    const auto len = static_cast<std::size_t>(m) * static_cast<std::size_t>(delta_w);
    if (len > gaps.size())
        throw WindowExceedsHorizon("window " + std::to_string(len) + " > horizon " + std::to_string(gaps.size()));
    return {gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(len)};
}

std::vector<double> raw_window(const NegotiationTrace& trace, int m, int delta_w) {
    return raw_window(std::span<const double>(trace.gaps), m, delta_w);
}

std::vector<double> transform(std::span<const double> x_raw, double epsilon, FeatureMode mode) {
    if (!(epsilon > 0.0)) throw ValidationError("transform epsilon must be > 0");
    std::vector<double> out(x_raw.size());
    for (std::size_t j = 0; j < x_raw.size(); ++j) {
        const double x = x_raw[j];
        if (!std::isfinite(x)) throw NonFiniteInput("gap " + std::to_string(j) + " is not finite");
        out[j] = mode == FeatureMode::Raw ? x : std::log10(std::abs(x) + epsilon);
    }
    return out;
}

FeatureTransform fit_standardizer(const Eigen::MatrixXd& X, double epsilon, FeatureMode mode) {
    if (X.rows() < 2) throw ValidationError("fit_standardizer needs at least 2 rows");
    FeatureTransform ft;
    ft.epsilon = epsilon;
    ft.mode = mode;
    ft.window_len = static_cast<int>(X.cols());
    ft.means.resize(static_cast<std::size_t>(X.cols()));
    ft.stds.resize(static_cast<std::size_t>(X.cols()));
    const double n = static_cast<double>(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        const double var = (X.col(j).array() - mean).square().sum() / (n - 1.0);
        const double sd = std::sqrt(var);
        ft.means[static_cast<std::size_t>(j)] = mean;
        ft.stds[static_cast<std::size_t>(j)] = sd < 1e-12 ? 1.0 : sd;
    }
    return ft;
}

std::vector<double> featurize(std::span<const double> gaps, int m, int delta_w, const FeatureTransform& ft) {
    if (ft.window_len != m * delta_w)
        throw DimensionMismatch("standardiser window " + std::to_string(ft.window_len) + " != m*delta_w = " +
                                std::to_string(m * delta_w));
    return ft.standardize(transform(raw_window(gaps, m, delta_w), ft.epsilon, ft.mode));
}

std::vector<double> featurize(const NegotiationTrace& trace, int m, int delta_w, const FeatureTransform& ft) {
    return featurize(std::span<const double>(trace.gaps), m, delta_w, ft);
}

Eigen::MatrixXd transformed_matrix(std::span<const NegotiationTrace> traces, int window_len, double epsilon,
                                   FeatureMode mode) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(traces.size()), window_len);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto row = transform(raw_window(traces[i], window_len, 1), epsilon, mode);
        X.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), window_len);
    }
    return X;
}

void standardize_rows(Eigen::MatrixXd& X, const FeatureTransform& ft) {
    if (X.cols() != ft.window_len)
        throw DimensionMismatch("matrix has " + std::to_string(X.cols()) + " columns for window " +
                                std::to_string(ft.window_len));
    const Eigen::Map<const Eigen::RowVectorXd> mu(ft.means.data(), ft.window_len);
    const Eigen::Map<const Eigen::RowVectorXd> sd(ft.stds.data(), ft.window_len);
    X = ((X.rowwise() - mu).array().rowwise() / sd.array()).matrix();
}

}  // namespace cpm
