#include <doctest.h>

#include <cmath>

#include "redwatch/synth.hpp"
#include "test_util.hpp"

using namespace redwatch;

namespace {

WorkloadSpec tiny_workload(double noise) {
    WorkloadSpec w;
    w.name = "toy";
    w.baseline = Eigen::VectorXd::Constant(kEventCount, 100.0);
    w.periodic = {{0, 20.0, 50.0, 0.0}, {3, 10.0, 25.0, 1.0}};
    w.noise_scale = Eigen::VectorXd::Constant(kEventCount, noise);
    return w;
}

}  // namespace

TEST_CASE("zero-noise limit reproduces the deterministic component exactly") {
    // noise_scale must stay positive; 1e-300 jitter vanishes below one ulp.
    const WorkloadSpec w = tiny_workload(1e-300);
    const Trace t = generate(w, {}, {.n_samples = 200, .seed = 9});
    for (int i = 0; i < t.size(); ++i) {
        for (int e = 0; e < kEventCount; ++e) {
            CHECK(t.samples[static_cast<std::size_t>(i)].counts[e] ==
                  w.deterministic_at(e, i));
        }
    }
}

TEST_CASE("duty cycle confines offsets to on-phases") {
    PerturbSpec attack;
    attack.name = "burst";
    attack.kind = PerturbKind::attack;
    attack.offset = Eigen::VectorXd::Zero(kEventCount);
    attack.offset[10] = 500.0;
    attack.extra_noise = Eigen::VectorXd::Zero(kEventCount);
    attack.duty_on = 100;
    attack.duty_off = 200;

    const Trace t = generate(std::nullopt, {attack}, {.n_samples = 900, .seed = 1});
    for (int i = 0; i < t.size(); ++i) {
        const double expected = (i % 300) < 100 ? 500.0 : 0.0;
        CHECK(t.samples[static_cast<std::size_t>(i)].counts[10] == expected);
    }
    CHECK(t.label.attack == "burst");
}

TEST_CASE("identical inputs give bit-identical traces") {
    const WorkloadSpec w = tiny_workload(5.0);
    const Trace a = generate(w, {}, {.n_samples = 500, .seed = 1234});
    const Trace b = generate(w, {}, {.n_samples = 500, .seed = 1234});
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.samples[static_cast<std::size_t>(i)].counts ==
              b.samples[static_cast<std::size_t>(i)].counts);
    }
    const Trace c = generate(w, {}, {.n_samples = 500, .seed = 1235});
    bool any_diff = false;
    for (int i = 0; i < a.size() && !any_diff; ++i) {
        any_diff = a.samples[static_cast<std::size_t>(i)].counts !=
                   c.samples[static_cast<std::size_t>(i)].counts;
    }
    CHECK(any_diff);
}

TEST_CASE("builtin catalog has the advertised shape") {
    const ScenarioCatalog cat = builtin_scenarios();
    CHECK(cat.workloads.size() == 5);
    CHECK(cat.benign.size() == 11);
    CHECK(cat.attacks.size() == 9);
    CHECK(cat.find_perturb("spectre_v3") != nullptr);
    CHECK(cat.find_perturb("l1pp") != nullptr);
    CHECK(cat.find_workload("ml_training") != nullptr);
    CHECK(cat.find_workload("idle") != nullptr);

    // Constructor contracts hold for every preset.
    for (const auto& w : cat.workloads) CHECK_NOTHROW(w.validate());
    for (const auto& p : cat.benign) CHECK_NOTHROW(p.validate());
    for (const auto& p : cat.attacks) CHECK_NOTHROW(p.validate());
    CHECK_NOTHROW(cat.idle_background.validate());
}

TEST_CASE("attacks separate from the workload mean by >= 3 sigma somewhere") {
    const ScenarioCatalog cat = builtin_scenarios();
    const long n = 4000;
    for (const auto& w : cat.workloads) {
        const Trace base = generate(w, {}, {.n_samples = n, .seed = 77});
        const Eigen::VectorXd base_mean = base.to_matrix().rowwise().mean();
        for (const auto& a : cat.attacks) {
            const Trace hit = generate(w, {a}, {.n_samples = n, .seed = 77});
            const Eigen::VectorXd hit_mean = hit.to_matrix().rowwise().mean();
            int separated = 0;
            for (int e = 0; e < kEventCount; ++e) {
                if (std::abs(hit_mean[e] - base_mean[e]) >=
                    3.0 * w.noise_scale[e]) {
                    ++separated;
                }
            }
            INFO(w.name << " + " << a.name);
            CHECK(separated >= 2);
        }
    }
}

TEST_CASE("clamping stays inactive when the floor is 6 sigma away") {
    // 60 samples x 13 events at 6 sigma: chance of any clamp < 1e-6.
    WorkloadSpec w = tiny_workload(10.0);
    w.periodic.clear();
    w.baseline = Eigen::VectorXd::Constant(kEventCount, 60.0);
    const Trace t = generate(w, {}, {.n_samples = 60, .seed = 2024});
    for (const auto& s : t.samples) {
        CHECK(s.counts.minCoeff() > 0.0);
    }
}

TEST_CASE("clamp engages instead of going negative") {
    WorkloadSpec w = tiny_workload(50.0);
    w.periodic.clear();
    w.baseline = Eigen::VectorXd::Zero(kEventCount);
    const Trace t = generate(w, {}, {.n_samples = 400, .seed = 3});
    double min_v = 1.0;
    for (const auto& s : t.samples) min_v = std::min(min_v, s.counts.minCoeff());
    CHECK(min_v == 0.0);  // about half the draws clamp
}

TEST_CASE("spec validation rejects degenerate parameters") {
    WorkloadSpec w = tiny_workload(1.0);
    w.noise_scale[4] = 0.0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);

    w = tiny_workload(1.0);
    w.periodic[0].period = 1.0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);

    PerturbSpec p;
    p.name = "empty";
    p.offset = Eigen::VectorXd::Zero(kEventCount);
    p.extra_noise = Eigen::VectorXd::Zero(kEventCount);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    CHECK_THROWS_AS(generate(std::nullopt, {}, {.n_samples = 10, .seed = 0}),
                    std::invalid_argument);
}

TEST_CASE("catalog files round-trip") {
    testutil::TempDir tmp;
    const ScenarioCatalog cat = builtin_scenarios();
    const auto path = tmp.file("catalog.txt");
    save_catalog(cat, path);
    const ScenarioCatalog back = load_catalog(path);

    REQUIRE(back.workloads.size() == cat.workloads.size());
    REQUIRE(back.benign.size() == cat.benign.size());
    REQUIRE(back.attacks.size() == cat.attacks.size());
    for (std::size_t i = 0; i < cat.workloads.size(); ++i) {
        CHECK(back.workloads[i].name == cat.workloads[i].name);
        CHECK(back.workloads[i].baseline == cat.workloads[i].baseline);
        CHECK(back.workloads[i].noise_scale == cat.workloads[i].noise_scale);
        CHECK(back.workloads[i].periodic.size() == cat.workloads[i].periodic.size());
    }
    for (std::size_t i = 0; i < cat.attacks.size(); ++i) {
        CHECK(back.attacks[i].offset == cat.attacks[i].offset);
        CHECK(back.attacks[i].extra_noise == cat.attacks[i].extra_noise);
    }

    // Same seed through a round-tripped catalog gives identical traces.
    const Trace a = generate(cat.workloads[0], {cat.attacks[0]},
                             {.n_samples = 64, .seed = 5});
    const Trace b = generate(back.workloads[0], {back.attacks[0]},
                             {.n_samples = 64, .seed = 5});
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.samples[static_cast<std::size_t>(i)].counts ==
              b.samples[static_cast<std::size_t>(i)].counts);
    }
}
