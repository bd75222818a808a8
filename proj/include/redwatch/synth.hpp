#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redwatch/trace.hpp"

namespace redwatch {

/// Sinusoidal term added to one event's deterministic component.
struct PeriodicTerm {
    int event = 0;          // index into the 13-event schema
    double amplitude = 0.0; // >= 0
    double period = 2.0;    // in samples, >= 2
    double phase = 0.0;     // radians
};

/// A steady task: per-event baseline plus sinusoids, with Gaussian jitter.
struct WorkloadSpec {
    std::string name;
    Eigen::VectorXd baseline;     // 13, >= 0
    std::vector<PeriodicTerm> periodic;
    Eigen::VectorXd noise_scale;  // 13, > 0

    void validate() const;
    double deterministic_at(int event, long sample_index) const;
};

enum class PerturbKind { benign, attack };

/// A concurrent program layered on top of a workload: additive offsets,
/// optional extra jitter, and an on/off duty cycle.
struct PerturbSpec {
    std::string name;
    PerturbKind kind = PerturbKind::benign;
    Eigen::VectorXd offset;       // 13
    Eigen::VectorXd extra_noise;  // 13, >= 0
    long duty_on = 1;             // samples active
    long duty_off = 0;            // samples idle; 0 means always on

    void validate() const;
    bool active_at(long sample_index) const;
};

struct GenerateOptions {
    long n_samples = 1;
    std::uint64_t seed = 0;
    double interval_ms = 10.0;
};

/// Deterministic trace synthesis: counts are clamped at zero after summing
/// the workload's deterministic part, its jitter, and every active perturb.
Trace generate(const std::optional<WorkloadSpec>& workload,
               const std::vector<PerturbSpec>& perturbs,
               const GenerateOptions& options);

/// Prebuilt desk-scale scenario set: 5 workloads, 11 benign programs,
/// 9 attacks, plus the near-quiet background a paused core falls back to.
struct ScenarioCatalog {
    std::vector<WorkloadSpec> workloads;
    std::vector<PerturbSpec> benign;
    std::vector<PerturbSpec> attacks;
    WorkloadSpec idle_background;

    const WorkloadSpec* find_workload(const std::string& name) const;
    const PerturbSpec* find_perturb(const std::string& name) const;
};

ScenarioCatalog builtin_scenarios();

/// Plain-text round trip for catalogs (key=value sections).
void save_catalog(const ScenarioCatalog& catalog, const std::string& path);
ScenarioCatalog load_catalog(const std::string& path);

}  // namespace redwatch
