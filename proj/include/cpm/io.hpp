#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cpm/dataset.hpp"
#include "cpm/ensemble.hpp"
#include "cpm/evaluation.hpp"

namespace cpm {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view kToolName = "cpm";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Little-endian IEEE-754 binary64, base64 encoded.
std::string encode_f64(std::span<const double> values);
std::vector<double> decode_f64(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct Provenance {
    std::string tool = std::string(kToolName);
    std::string version = std::string(kToolVersion);
    std::string config_hash;
    std::uint64_t master_seed = 0;

    json to_json() const;
    static Provenance from_json(const json& j);
    // "# tool=cpm version=... config_hash=... master_seed=..." plus extra key=value pairs.
    std::string csv_comment(const std::vector<std::pair<std::string, std::string>>& extra = {}) const;
    bool operator==(const Provenance&) const = default;
};

// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

// JSON mappings for the domain types.
json to_json(const ProsumerModel& p);
ProsumerModel prosumer_from_json(const json& j);
json to_json(const MarketConfig& m);
MarketConfig market_from_json(const json& j);
json to_json(const AttackSpec& a);
AttackSpec attack_from_json(const json& j);
json to_json(const MarketRandomization& r);
MarketRandomization randomization_from_json(const json& j);
json to_json(const DatasetConfig& d);
DatasetConfig dataset_config_from_json(const json& j);
json to_json(const SamplerConfig& s);
SamplerConfig sampler_from_json(const json& j);
json to_json(const CpmConfig& c);
CpmConfig cpm_config_from_json(const json& j);
json to_json(const FeatureTransform& ft);
FeatureTransform feature_transform_from_json(const json& j);
json to_json(const BlrPosterior& post);
BlrPosterior posterior_from_json(const json& j);

// Dataset directory: traces.csv (trace_id,iteration,gap) + manifest.json.
inline constexpr std::string_view kTraceCsv = "traces.csv";
inline constexpr std::string_view kDatasetManifest = "manifest.json";

std::string dataset_id(const DatasetConfig& cfg);
std::string traces_csv(const Dataset& ds, const Provenance& prov);
json dataset_manifest(const Dataset& ds, const Provenance& prov);
void write_dataset(const Dataset& ds, const fs::path& dir, const Provenance& prov);
Dataset read_dataset(const fs::path& dir);

// Model directory: ensemble.json + model_NNN.json per window length.
inline constexpr std::string_view kEnsembleManifest = "ensemble.json";

struct EnsembleFiles {
    CpmEnsemble ensemble;
    json metadata;  // free-form section of the manifest (split, dataset id)
    Provenance provenance;
    std::string fingerprint;
};

std::string model_file_name(int m);
// Hash over the serialised model files, in model order.
std::string ensemble_fingerprint(const CpmEnsemble& ens, const Provenance& prov);
void write_ensemble(const CpmEnsemble& ens, const fs::path& dir, const Provenance& prov, const json& metadata);
EnsembleFiles read_ensemble(const fs::path& dir);

// Reports.
std::string metrics_grid_csv(const MetricsReport& report, const Provenance& prov);
std::string metrics_long_csv(const MetricsReport& report, const Provenance& prov);
MetricsReport parse_metrics_long_csv(std::string_view text);
std::string false_positive_csv(std::span<const FalsePositiveRecord> records, const Provenance& prov,
                               std::span<const int> delta_ws = {});
std::vector<FalsePositiveRecord> parse_false_positive_csv(std::string_view text);

// Splits CSV text into non-comment rows of fields (no quoting support needed:
// no field ever contains a comma).
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text);
// key=value pairs from the leading "# ..." comment line.
std::vector<std::pair<std::string, std::string>> parse_csv_comment(std::string_view text);

}  // namespace cpm
