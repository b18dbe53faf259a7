#include <algorithm>
#include <set>
#include <unordered_set>
#include <vector>

#include "doctest.h"

#include "cpm/attack.hpp"
#include "cpm/dataset.hpp"
#include "cpm/error.hpp"

using namespace cpm;

namespace {

std::vector<double> apply_once(const AttackSpec& spec, int iter, std::vector<double> v) {
    AttackInjector inj(spec);
    inj.apply(iter, v);
    return v;
}

}  // namespace

TEST_CASE("attack application examples") {
    const AttackSpec bias{0, 15, AttackKind::Bias, 0.5, 0};
    CHECK(apply_once(bias, 10, {1, 2, 3}) == std::vector<double>{1, 2, 3});
    CHECK(apply_once(bias, 15, {1, 2, 3}) == std::vector<double>{1.5, 2, 3});

    for (int target = 0; target < 3; ++target)
        for (int iter : {0, 7, 99}) {
            const AttackSpec unit{target, 0, AttackKind::Scale, 1.0, 0};
            CHECK(apply_once(unit, iter, {1, -2, 3}) == std::vector<double>{1, -2, 3});
        }

    const AttackSpec scale{2, 0, AttackKind::Scale, 1.5, 0};
    CHECK(apply_once(scale, 3, {1, 2, 3}) == std::vector<double>{1, 2, 4.5});
}

TEST_CASE("freeze replays the value seen at the start iteration") {
    AttackInjector inj({1, 5, AttackKind::Freeze, 0.0, 0});
    std::vector<double> v{0, 7, 0};
    inj.apply(4, v);
    CHECK(v[1] == 7);
    v = {0, 3, 0};
    inj.apply(5, v);
    CHECK(v[1] == 3);
    v = {0, -9, 1};
    inj.apply(6, v);
    CHECK(v == std::vector<double>{0, 3, 1});
}

TEST_CASE("noise perturbation is bounded, seeded and zero-mean") {
    const AttackSpec spec{0, 0, AttackKind::Noise, 0.2, 99};
    double sum = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
        const double n = attack_noise(spec, iter);
        CHECK(std::abs(n) <= 0.2);
        CHECK(n == attack_noise(spec, iter));
        sum += n;
    }
    CHECK(std::abs(sum / 20000) < 0.005);
    const auto v = apply_once(spec, 3, {1, 1});
    CHECK(v[0] == 1 + attack_noise(spec, 3));
    CHECK(v[1] == 1);
}

TEST_CASE("attack validation") {
    std::vector<double> v{1, 2};
    AttackInjector inj({5, 0, AttackKind::Bias, 0.1, 0});
    CHECK_THROWS_AS(inj.apply(0, v), TargetOutOfRange);
    CHECK_THROWS_AS((AttackSpec{-1, 0, AttackKind::Bias, 0.1, 0}.validate()), ValidationError);
    CHECK_THROWS_AS((AttackSpec{0, 120, AttackKind::Bias, 0.1, 0}.validate(100)), ValidationError);
    CHECK_THROWS_AS(attack_kind_from_string("drift"), ValidationError);
    CHECK(attack_kind_from_string(to_string(AttackKind::Freeze)) == AttackKind::Freeze);
    CHECK(protocol_from_string("data2") == Protocol::Data2);
}

TEST_CASE("attack draws follow the protocol") {
    std::set<AttackKind> kinds;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        const auto d1 = draw_attack_spec(Protocol::Data1, 3, s);
        CHECK(d1.start_iter == 0);
        const auto d2 = draw_attack_spec(Protocol::Data2, 3, s);
        CHECK(d2.start_iter >= 15);
        CHECK(d2.start_iter <= 55);
        CHECK(d2.target >= 0);
        CHECK(d2.target < 3);
        kinds.insert(d2.kind);
        switch (d2.kind) {
        case AttackKind::Bias:
            CHECK(std::abs(d2.magnitude) >= 0.05);
            CHECK(std::abs(d2.magnitude) <= 1.0);
            break;
        case AttackKind::Scale:
            CHECK(d2.magnitude >= 0.5);
            CHECK(d2.magnitude <= 1.5);
            CHECK((d2.magnitude < 0.98 || d2.magnitude > 1.02));
            break;
        case AttackKind::Noise:
            CHECK(d2.magnitude >= 0.01);
            CHECK(d2.magnitude <= 0.5);
            break;
        case AttackKind::Freeze:
            CHECK(d2.magnitude == 0.0);
            break;
        }
        CHECK(draw_attack_spec(Protocol::Data2, 3, s) == d2);
    }
    CHECK(kinds.size() == 4);
}

TEST_CASE("dataset counts and labels") {
    auto cfg = default_dataset_config(Protocol::Data1, 10, 42);
    const auto ds = generate_dataset(cfg);
    REQUIRE(ds.traces.size() == 10);
    CHECK(std::count_if(ds.traces.begin(), ds.traces.end(), [](const auto& t) { return t.label == 0; }) == 5);
    for (const auto& t : ds.traces) {
        CHECK(t.gaps.size() == 100);
        CHECK((t.label == 0) == t.attack.has_value());
    }

    cfg.attacked_fraction = 0.3;
    cfg.n_traces = 7;
    const auto odd = generate_dataset(cfg);
    CHECK(std::count_if(odd.traces.begin(), odd.traces.end(), [](const auto& t) { return t.label == 0; }) == 2);
}

TEST_CASE("stressed datasets start attacks mid-negotiation") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data2, 200, 3));
    for (const auto& t : ds.traces)
        if (t.attack) {
            CHECK(t.attack->start_iter >= 15);
            CHECK(t.attack->start_iter <= 55);
        }
}

TEST_CASE("dataset generation is deterministic and independent of thread count") {
    const auto cfg = default_dataset_config(Protocol::Data2, 120, 8);
    const auto a = generate_dataset(cfg, 1);
    CHECK(a == generate_dataset(cfg, 1));
    CHECK(a == generate_dataset(cfg, 4));
}

TEST_CASE("gaps before the attack start match the clean run") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data2, 200, 17));
    int checked = 0;
    for (const auto& t : ds.traces) {
        if (!t.attack) continue;
        const auto clean = run_negotiation(t.market, std::nullopt, t.seed);
        const int s = t.attack->start_iter;
        for (int k = 0; k <= s; ++k) CHECK(t.gaps[k] == clean.gaps[k]);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("derived seeds do not collide") {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2'000'000);
    for (std::uint64_t i = 0; i < 1'000'000; ++i) seen.insert(derive_seed(12345, i));
    CHECK(seen.size() == 1'000'000);
}

TEST_CASE("dataset validation") {
    auto cfg = default_dataset_config(Protocol::Data1, 0, 1);
    CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);
    cfg.n_traces = 10;
    cfg.attacked_fraction = 1.5;
    CHECK_THROWS_AS(generate_dataset(cfg), ValidationError);
}

TEST_CASE("stratified split keeps class proportions") {
    const auto ds = generate_dataset(default_dataset_config(Protocol::Data1, 200, 5));
    const auto split = stratified_split(ds.traces, 0.75, 9);
    CHECK(split.train.size() == 150);
    CHECK(split.test.size() == 50);
    auto attacked = [](const auto& v) {
        return std::count_if(v.begin(), v.end(), [](const auto& t) { return t.label == 0; });
    };
    CHECK(attacked(split.train) == 75);
    CHECK(attacked(split.test) == 25);
    std::set<std::string> ids;
    for (const auto& t : split.train) ids.insert(t.trace_id);
    for (const auto& t : split.test) CHECK(ids.insert(t.trace_id).second);
}
