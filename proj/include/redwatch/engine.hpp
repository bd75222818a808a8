#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redwatch/kde.hpp"
#include "redwatch/lstm.hpp"
#include "redwatch/trace.hpp"

namespace redwatch {

struct EngineConfig {
    int window = 5;             // contiguous flags needed for a verdict
    double interval_ms = 10.0;  // sampling period
    double pause_gap_ms = 10.0; // turnaround between pausing and recollecting
    double t_red_ms = 0.02;     // residual inference cost per window
    double t_kde1_ms = 0.76;    // first-stage density query cost
    double t_kde2_ms = 1.58;    // second-stage density query cost

    void validate() const;
};

enum class Stage { step1, step2 };
enum class Verdict { normal, anomaly, case1, case2, case3, case4 };
enum class Priority { none, medium, high };
enum class Response { none, pause_workload, alarm_high, alarm_medium,
                      resume_workload };

std::string_view stage_name(Stage s);
std::string_view verdict_name(Verdict v);
std::string_view priority_name(Priority p);
std::string_view response_name(Response r);

struct DetectionEvent {
    double t_ms = 0.0;
    Stage stage = Stage::step1;
    Verdict verdict = Verdict::normal;
    Priority priority = Priority::none;
    Response response = Response::none;
    double score_min = 0.0;  // over the decision window
    double score_max = 0.0;
};

/// Verdict/priority/response for one (attack-vote, benign-vote) pair:
///   (Y,Y) stealthy attack, (Y,N) attack, (N,Y) benign resume,
///   (N,N) zero-day or unknown benign program.
struct CaseDecision {
    Verdict verdict;
    Priority priority;
    Response response;
};

CaseDecision classify_case(bool attack_vote, bool benign_vote);

/// Analytical end-to-end detection latency. The no-anomaly path covers
/// collection of one window plus first-stage inference; the attack path
/// adds the pause turnaround and a second collect-and-classify pass.
double latency_model(const EngineConfig& cfg, bool attack_path);

/// Stage costs shipped as latency-table presets, one row per window size.
struct StagePreset {
    int window;
    double t_red_ms;
    double t_kde1_ms;
    double t_kde2_ms;
};

const std::vector<StagePreset>& reference_stage_presets();

/// First-stage detector plus the two second-stage classifiers.
struct DetectorBundle {
    KdeDetector normal;
    KdeDetector attack;
    KdeDetector benign;
};

/// Single-writer online state machine. One alarm per contiguous anomalous
/// run: after an emission, flags must return to normal before the engine
/// can alarm again. Detectors and model are shared read-only.
class Engine {
public:
    enum class Mode { monitoring, paused_for_step2 };

    Engine(const PredictorModel& model, const DetectorBundle& detectors,
           const EngineConfig& cfg);

    Mode mode() const { return mode_; }

    /// Feeds one sample; returns an anomaly event when the last `window`
    /// per-sample flags are all anomalous and this run has not alarmed yet.
    /// Throws if called while paused.
    std::optional<DetectionEvent> step1_ingest(const BehaviorSample& sample);

    /// Classifies the pause-window measurements. Expects the model warmup
    /// history plus `window` fresh samples (history_len + window total),
    /// all collected with the workload off. Resets the engine to monitoring.
    DetectionEvent step2_classify(std::span<const BehaviorSample> samples);

    /// Back to monitoring with cleared buffers (used after a resume).
    void resume();

private:
    const PredictorModel& model_;
    const DetectorBundle& detectors_;
    EngineConfig cfg_;
    Mode mode_ = Mode::monitoring;
    std::vector<BehaviorSample> history_;  // last history_len samples
    std::deque<bool> flags_;
    std::deque<double> window_scores_;
    bool run_emitted_ = false;
};

/// Aligned scenario pair: what the core records while the workload runs,
/// and what it would record at the same instants with the workload off.
struct ScenarioTraces {
    Trace active;
    Trace paused;
};

/// Replays a recorded scenario through the engine. Anomalies pause the
/// replay, classify against the paused continuation, and resume after the
/// verdict; every anomaly event is followed by exactly one step-2 event.
std::vector<DetectionEvent> replay_scenario(const ScenarioTraces& scenario,
                                            const PredictorModel& model,
                                            const DetectorBundle& detectors,
                                            const EngineConfig& cfg);

/// Event log line: t_ms stage verdict priority response score_min score_max.
std::string format_event(const DetectionEvent& event);
DetectionEvent parse_event(const std::string& line);
void save_event_log(const std::vector<DetectionEvent>& events,
                    const std::string& path);

}  // namespace redwatch
