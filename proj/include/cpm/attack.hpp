#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "cpm/rng.hpp"

namespace cpm {

enum class AttackKind { Bias, Scale, Noise, Freeze };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);

enum class Protocol { Data1, Data2 };

std::string_view to_string(Protocol protocol);
Protocol protocol_from_string(std::string_view name);

// False-data injection into one prosumer's reported power.
struct AttackSpec {
    int target = 0;
    int start_iter = 0;
    AttackKind kind = AttackKind::Bias;
    double magnitude = 0.0;
    std::uint64_t noise_seed = 0;

    // Throws ValidationError. horizon <= 0 skips the start_iter check.
    void validate(int horizon = 0) const;

    bool operator==(const AttackSpec&) const = default;
};

// Applies an AttackSpec iteration by iteration. Stateful only for Freeze,
// which caches the target's value at start_iter.
class AttackInjector {
public:
    explicit AttackInjector(const AttackSpec& spec);

    // Perturbs `reported` in place for iteration `iter`.
    void apply(int iter, std::span<double> reported);

    const AttackSpec& spec() const noexcept { return spec_; }

private:
    AttackSpec spec_;
    std::optional<double> frozen_;
};

// Noise draw used by AttackKind::Noise at a given iteration; exposed for tests.
double attack_noise(const AttackSpec& spec, int iter);

// Data1 attacks start at iteration 0, Data2 attacks at a uniform iteration in [15, 55].
inline constexpr int kData2StartMin = 15;
inline constexpr int kData2StartMax = 55;

AttackSpec draw_attack_spec(Protocol protocol, int n_prosumers, std::uint64_t rng_seed);

}  // namespace cpm
