#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redwatch/engine.hpp"
#include "redwatch/synth.hpp"

namespace redwatch {

/// Ground-truth labeling: contiguous, non-overlapping intervals covering
/// the evaluated timestamps.
struct TruthInterval {
    double t_begin = 0.0;
    double t_end = 0.0;
    bool attack = false;
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    double fpr() const {
        return fp + tn > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
    }
    double fnr() const {
        return fn + tp > 0 ? static_cast<double>(fn) / static_cast<double>(fn + tp) : 0.0;
    }
};

/// Matches each windowed decision to the truth by its timestamp. A decision
/// spanning [t - window_ms, t] counts as an attack window when any attack
/// interval overlaps that span. Alarming verdicts are anomaly and cases
/// 1, 2 and 4; normal and case 3 are non-alarms. Throws on timestamps the
/// intervals do not cover.
ConfusionCounts compute_rates(const std::vector<DetectionEvent>& decisions,
                              const std::vector<TruthInterval>& truth,
                              double window_ms);

struct ScenarioDef {
    std::string workload;
    std::optional<std::string> benign;
    std::optional<std::string> attack;

    bool has_attack() const { return attack.has_value(); }
    std::string name() const;
};

/// Per-sample detector signals for one scenario, shared by every window
/// size: first-stage scores and flags from the live trace, second-stage
/// votes from the aligned workload-off trace.
struct ScenarioRun {
    ScenarioDef def;
    double interval_ms = 10.0;
    std::vector<double> t_ms;
    std::vector<double> step1_score;
    std::vector<char> step1_flag;
    std::vector<char> attack_vote;
    std::vector<char> benign_vote;
};

struct ExperimentConfig {
    long n_samples = 3000;
    std::uint64_t seed = 42;
    int w = 5;
    std::vector<int> sweep_w = {1, 5, 10, 50, 100, 200};
    int max_reference = 2000;  // detector reference subsample cap
    double coverage = 0.80;    // normal-detector calibration target
    TrainConfig train;

    void validate() const;
};

PredictorModel train_on_workloads(const ScenarioCatalog& catalog,
                                  const ExperimentConfig& cfg);

/// Builds and calibrates the three detectors from clean recordings.
/// `known_attacks` empty means every catalog attack is known.
DetectorBundle profile_detectors(const ScenarioCatalog& catalog,
                                 const PredictorModel& model,
                                 const ExperimentConfig& cfg,
                                 const std::vector<std::string>& known_attacks = {});

ScenarioRun score_scenario(const ScenarioCatalog& catalog,
                           const PredictorModel& model,
                           const DetectorBundle& detectors,
                           const ScenarioDef& def,
                           const ExperimentConfig& cfg);

/// One decision per evaluable window end: a step-1 normal verdict, or the
/// step-2 case the window's majority votes resolve to.
std::vector<DetectionEvent> window_decisions(const ScenarioRun& run, int w);

std::vector<TruthInterval> scenario_truth(const ScenarioRun& run);

ConfusionCounts window_rates(const ScenarioRun& run, int w);

struct CaseDistribution {
    std::string name;
    std::array<double, 4> case_pct = {0, 0, 0, 0};  // of flagged windows
    long windows = 0;                               // flagged window count
};

/// Case mix over every window of each held-out attack, classified by a
/// bundle whose attack detector saw only the known subset.
std::vector<CaseDistribution> holdout_evaluation(
    const ScenarioCatalog& catalog, const PredictorModel& model,
    const DetectorBundle& known_bundle,
    const std::vector<std::string>& known_attacks,
    const std::vector<std::string>& heldout_attacks,
    const ExperimentConfig& cfg);

/// Holdout split exercised by the shipped experiment.
const std::vector<std::string>& default_known_attacks();
const std::vector<std::string>& default_heldout_attacks();

struct ScenarioRates {
    ScenarioDef def;
    ConfusionCounts counts;
};

struct SweepRow {
    int w = 0;
    std::string workload;  // "all" for the pooled row
    double mean_fpr = 0.0;
    double mean_fnr = 0.0;
};

struct EvalReport {
    std::uint64_t seed = 0;
    int w = 5;
    std::vector<ScenarioRates> scenario_rates;
    std::vector<SweepRow> sweep;
    std::vector<CaseDistribution> case_distribution;  // by scenario class
    std::vector<CaseDistribution> zero_day;
    double false_alarm_reduction = 0.0;
    double mean_attack_fnr = 0.0;      // over attack scenarios, at w
    double mean_attack_free_fpr = 0.0; // over attack-free scenarios, at w
};

/// Full desk-scale experiment on the built-in presets: train, profile,
/// score every workload/benign/attack combination, sweep window sizes and
/// run the zero-day holdout. Deterministic for a fixed config.
EvalReport run_experiment(const ExperimentConfig& cfg);

/// CSV tables plus a plain-text summary under `dir` (created if needed).
void write_report(const EvalReport& report, const std::string& dir);

}  // namespace redwatch
