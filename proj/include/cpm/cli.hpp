#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpm/dataset.hpp"
#include "cpm/ensemble.hpp"

namespace cpm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitComputation = 4;

// Every tunable of every subcommand. Loaded from a JSON config file, then
// overridden by command-line flags, then validated before any work starts.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    int jobs = 1;
    bool quiet = false;

    DatasetConfig dataset;  // market, randomization, protocol, size
    CpmConfig cpm;
    double train_fraction = 0.75;
    std::vector<int> sweep_delta_ws{5, 10, 20};
    std::vector<int> sweep_spans{20, 40, 60, 80, 100};

    std::filesystem::path data_dir;
    std::filesystem::path test_data_dir;
    std::filesystem::path model_dir;
    std::filesystem::path report_input;
    std::string trace_id;
    bool incremental = false;
    bool all_traces = false;

    void validate() const;
};

// Strict merge: unknown keys raise ValidationError naming the key path.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Settings that influence results (paths, jobs and verbosity excluded).
nlohmann::json result_config_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

// Seeds for the split and the sampler, derived from the master seed.
std::uint64_t split_seed(std::uint64_t master);
std::uint64_t sampler_seed(std::uint64_t master);

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpm::cli
