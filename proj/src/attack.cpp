#include "cpm/attack.hpp"

#include <cmath>
#include <string>

#include "cpm/error.hpp"

namespace cpm {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::Bias: return "bias";
        case AttackKind::Scale: return "scale";
        case AttackKind::Noise: return "noise";
        case AttackKind::Freeze: return "freeze";
    }
    return "unknown";
}

AttackKind attack_kind_from_string(std::string_view name) {
    if (name == "bias") return AttackKind::Bias;
    if (name == "scale") return AttackKind::Scale;
    if (name == "noise") return AttackKind::Noise;
    if (name == "freeze") return AttackKind::Freeze;
    throw ValidationError("unknown attack kind '" + std::string(name) + "'");
}

std::string_view to_string(Protocol protocol) {
    return protocol == Protocol::Data1 ? "data1" : "data2";
}

Protocol protocol_from_string(std::string_view name) {
    if (name == "data1" || name == "Data1") return Protocol::Data1;
    if (name == "data2" || name == "Data2") return Protocol::Data2;
    throw ValidationError("unknown protocol '" + std::string(name) + "' (expected data1 or data2)");
}

void AttackSpec::validate(int horizon) const {
    if (target < 0) throw ValidationError("attack target must be >= 0");
    if (start_iter < 0) throw ValidationError("attack start_iter must be >= 0");
    if (horizon > 0 && start_iter >= horizon)
        throw ValidationError("attack start_iter " + std::to_string(start_iter) +
                              " must be < horizon " + std::to_string(horizon));
    if (!std::isfinite(magnitude)) throw ValidationError("attack magnitude must be finite");
    if (kind == AttackKind::Scale && magnitude < 0.0)
        throw ValidationError("scale attack magnitude must be >= 0");
    if (kind == AttackKind::Noise && magnitude <= 0.0)
        throw ValidationError("noise attack magnitude must be > 0");
}

AttackInjector::AttackInjector(const AttackSpec& spec) : spec_(spec) { spec_.validate(); }

double attack_noise(const AttackSpec& spec, int iter) {
    Rng rng = make_rng(derive_seed(spec.noise_seed, static_cast<std::uint64_t>(iter)));
    return uniform(rng, -spec.magnitude, spec.magnitude);
}

void AttackInjector::apply(int iter, std::span<double> reported) {
    if (spec_.target >= static_cast<int>(reported.size()))
        throw TargetOutOfRange("target " + std::to_string(spec_.target) + " with " +
                               std::to_string(reported.size()) + " prosumers");
    if (iter < spec_.start_iter) return;
    double& value = reported[static_cast<std::size_t>(spec_.target)];
    switch (spec_.kind) {
        case AttackKind::Bias: value += spec_.magnitude; break;
        case AttackKind::Scale: value *= spec_.magnitude; break;
        case AttackKind::Noise: value += attack_noise(spec_, iter); break;
        case AttackKind::Freeze:
            if (!frozen_) frozen_ = value;
            value = *frozen_;
            break;
    }
}

AttackSpec draw_attack_spec(Protocol protocol, int n_prosumers, std::uint64_t rng_seed) {
    if (n_prosumers < 1) throw ValidationError("draw_attack_spec needs n_prosumers >= 1");
    Rng rng = make_rng(rng_seed);
    AttackSpec spec;
    spec.target = static_cast<int>(uniform_int(rng, 0, n_prosumers - 1));
    spec.start_iter = protocol == Protocol::Data1
                          ? 0
                          : static_cast<int>(uniform_int(rng, kData2StartMin, kData2StartMax));
    spec.kind = static_cast<AttackKind>(uniform_int(rng, 0, 3));
    switch (spec.kind) {
        case AttackKind::Bias: {
            const double size = uniform(rng, 0.05, 1.0);
            spec.magnitude = uniform01(rng) < 0.5 ? -size : size;
            break;
        }
        case AttackKind::Scale: {
            // Uniform on [0.5, 1.5] minus the near-identity band [0.98, 1.02].
            double s;
            do {
                s = uniform(rng, 0.5, 1.5);
            } while (s >= 0.98 && s <= 1.02);
            spec.magnitude = s;
            break;
        }
        case AttackKind::Noise: spec.magnitude = uniform(rng, 0.01, 0.5); break;
        case AttackKind::Freeze: spec.magnitude = 0.0; break;
    }
    spec.noise_seed = rng();
    return spec;
}

}  // namespace cpm
