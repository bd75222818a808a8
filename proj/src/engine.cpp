#include "redwatch/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/residuals.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {

void EngineConfig::validate() const {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (!(interval_ms > 0.0)) throw std::invalid_argument("interval must be > 0");
    if (pause_gap_ms < 0.0 || t_red_ms < 0.0 || t_kde1_ms < 0.0 ||
        t_kde2_ms < 0.0) {
        throw std::invalid_argument("stage costs must be >= 0");
    }
}

std::string_view stage_name(Stage s) {
    return s == Stage::step1 ? "step1" : "step2";
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::normal: return "normal";
        case Verdict::anomaly: return "anomaly";
        case Verdict::case1: return "case1";
        case Verdict::case2: return "case2";
        case Verdict::case3: return "case3";
        case Verdict::case4: return "case4";
    }
    return "?";
}

std::string_view priority_name(Priority p) {
    switch (p) {
        case Priority::none: return "none";
        case Priority::medium: return "medium";
        case Priority::high: return "high";
    }
    return "?";
}

std::string_view response_name(Response r) {
    switch (r) {
        case Response::none: return "none";
        case Response::pause_workload: return "pause_workload";
        case Response::alarm_high: return "alarm_high";
        case Response::alarm_medium: return "alarm_medium";
        case Response::resume_workload: return "resume_workload";
    }
    return "?";
}

CaseDecision classify_case(bool attack_vote, bool benign_vote) {
    if (attack_vote && benign_vote) {
        return {Verdict::case1, Priority::high, Response::alarm_high};
    }
    if (attack_vote) {
        return {Verdict::case2, Priority::high, Response::alarm_high};
    }
    if (benign_vote) {
        return {Verdict::case3, Priority::none, Response::resume_workload};
    }
    return {Verdict::case4, Priority::medium, Response::alarm_medium};
}

const std::vector<StagePreset>& reference_stage_presets() {
    static const std::vector<StagePreset> presets = {
        {1, 0.02, 0.76, 1.58},  {5, 0.02, 0.76, 1.58}, {10, 0.02, 0.77, 1.60},
        {50, 0.02, 0.78, 1.62}, {100, 0.02, 0.79, 1.65},
    };
    return presets;
}

double latency_model(const EngineConfig& cfg, bool attack_path) {
    cfg.validate();
    const double w = static_cast<double>(cfg.window);
    const double step1 = w * cfg.interval_ms + cfg.t_red_ms + cfg.t_kde1_ms;
    if (!attack_path) return step1;
    return step1 + cfg.pause_gap_ms + w * cfg.interval_ms + cfg.t_red_ms +
           cfg.t_kde2_ms;
}

Engine::Engine(const PredictorModel& model, const DetectorBundle& detectors,
               const EngineConfig& cfg)
    : model_(model), detectors_(detectors), cfg_(cfg) {
    cfg_.validate();
    if (detectors_.normal.dim() != model_.input_dim ||
        detectors_.attack.dim() != model_.input_dim ||
        detectors_.benign.dim() != model_.input_dim) {
        throw FormatError("detector dimensions do not match the model");
    }
}

std::optional<DetectionEvent> Engine::step1_ingest(const BehaviorSample& sample) {
    if (mode_ != Mode::monitoring) {
        throw std::logic_error("step1_ingest called while paused");
    }
    if (sample.counts.size() != model_.input_dim) {
        throw FormatError("sample dimension does not match the model");
    }

    std::optional<DetectionEvent> event;
    if (static_cast<int>(history_.size()) == model_.history_len) {
        const Eigen::VectorXd predicted = predict_next(
            model_, std::span<const BehaviorSample>(history_.data(), history_.size()));
        const Eigen::VectorXd residual =
            model_.normalize(sample.counts) - model_.normalize(predicted);
        const double score = detectors_.normal.anomaly_score(residual);
        const bool anomalous = score > detectors_.normal.threshold();

        flags_.push_back(anomalous);
        window_scores_.push_back(score);
        if (static_cast<int>(flags_.size()) > cfg_.window) {
            flags_.pop_front();
            window_scores_.pop_front();
        }
        if (!anomalous) run_emitted_ = false;

        const bool window_full = static_cast<int>(flags_.size()) == cfg_.window;
        const bool all_anomalous =
            window_full && std::all_of(flags_.begin(), flags_.end(),
                                       [](bool f) { return f; });
        if (all_anomalous && !run_emitted_) {
            DetectionEvent e;
            e.t_ms = sample.t_ms;
            e.stage = Stage::step1;
            e.verdict = Verdict::anomaly;
            e.priority = Priority::none;
            e.response = Response::pause_workload;
            e.score_min = *std::min_element(window_scores_.begin(),
                                            window_scores_.end());
            e.score_max = *std::max_element(window_scores_.begin(),
                                            window_scores_.end());
            event = e;
            run_emitted_ = true;
            mode_ = Mode::paused_for_step2;
        }
    }

    history_.push_back(sample);
    if (static_cast<int>(history_.size()) > model_.history_len) {
        history_.erase(history_.begin());
    }
    return event;
}

DetectionEvent Engine::step2_classify(std::span<const BehaviorSample> samples) {
    if (mode_ != Mode::paused_for_step2) {
        throw std::logic_error("step2_classify called while monitoring");
    }
    const int expected = model_.history_len + cfg_.window;
    if (static_cast<int>(samples.size()) != expected) {
        throw std::invalid_argument(
            "step2 expects history_len + window samples (" +
            std::to_string(expected) + ")");
    }

    Trace mini;
    mini.samples.assign(samples.begin(), samples.end());
    mini.source = "step2-window";
    const ResidualSet residuals = compute_residuals(model_, mini);

    int attack_hits = 0;
    int benign_hits = 0;
    double score_min = std::numeric_limits<double>::infinity();
    double score_max = -score_min;
    for (Eigen::Index i = 0; i < residuals.count(); ++i) {
        const auto col = residuals.samples.col(i);
        const double attack_score = detectors_.attack.anomaly_score(col);
        if (attack_score <= detectors_.attack.threshold()) ++attack_hits;
        if (detectors_.benign.accepts(col)) ++benign_hits;
        score_min = std::min(score_min, attack_score);
        score_max = std::max(score_max, attack_score);
    }
    const bool attack_vote = 2 * attack_hits > cfg_.window;
    const bool benign_vote = 2 * benign_hits > cfg_.window;
    const CaseDecision decision = classify_case(attack_vote, benign_vote);

    DetectionEvent event;
    event.t_ms = samples.back().t_ms;
    event.stage = Stage::step2;
    event.verdict = decision.verdict;
    event.priority = decision.priority;
    event.response = decision.response;
    event.score_min = score_min;
    event.score_max = score_max;

    resume();
    return event;
}

void Engine::resume() {
    mode_ = Mode::monitoring;
    history_.clear();
    flags_.clear();
    window_scores_.clear();
}

std::vector<DetectionEvent> replay_scenario(const ScenarioTraces& scenario,
                                            const PredictorModel& model,
                                            const DetectorBundle& detectors,
                                            const EngineConfig& cfg) {
    cfg.validate();
    if (scenario.active.size() != scenario.paused.size()) {
        throw FormatError("active and paused traces must be aligned");
    }
    const int n = scenario.active.size();
    const int L = model.history_len;
    Engine engine(model, detectors, cfg);

    std::vector<DetectionEvent> events;
    // Stop early enough that a pause window always fits in the recording.
    for (int i = 0; i + cfg.window < n; ++i) {
        auto anomaly =
            engine.step1_ingest(scenario.active.samples[static_cast<std::size_t>(i)]);
        if (!anomaly) continue;
        events.push_back(*anomaly);

        // The workload stops; the next window comes from the paused
        // recording, warmed up with the preceding paused samples.
        const int begin = i + 1 - L;
        std::vector<BehaviorSample> window(
            scenario.paused.samples.begin() + begin,
            scenario.paused.samples.begin() + i + 1 + cfg.window);
        events.push_back(engine.step2_classify(window));
        i += cfg.window;  // pause consumed this stretch of the timeline
    }
    return events;
}

std::string format_event(const DetectionEvent& e) {
    std::ostringstream os;
    os << textio::format_double(e.t_ms) << ' ' << stage_name(e.stage) << ' '
       << verdict_name(e.verdict) << ' ' << priority_name(e.priority) << ' '
       << response_name(e.response) << ' ' << textio::format_double(e.score_min)
       << ' ' << textio::format_double(e.score_max);
    return os.str();
}

DetectionEvent parse_event(const std::string& line) {
    std::istringstream iss(line);
    std::string t, stage, verdict, priority, response, smin, smax;
    if (!(iss >> t >> stage >> verdict >> priority >> response >> smin >> smax)) {
        throw FormatError("bad event line: '" + line + "'");
    }
    std::string extra;
    if (iss >> extra) throw FormatError("trailing event fields: '" + line + "'");

    DetectionEvent e;
    e.t_ms = textio::parse_double(t, "event");
    if (stage == "step1") e.stage = Stage::step1;
    else if (stage == "step2") e.stage = Stage::step2;
    else throw FormatError("bad stage '" + stage + "'");

    bool found = false;
    for (const Verdict v : {Verdict::normal, Verdict::anomaly, Verdict::case1,
                            Verdict::case2, Verdict::case3, Verdict::case4}) {
        if (verdict_name(v) == verdict) {
            e.verdict = v;
            found = true;
            break;
        }
    }
    if (!found) throw FormatError("bad verdict '" + verdict + "'");
    found = false;
    for (const Priority p : {Priority::none, Priority::medium, Priority::high}) {
        if (priority_name(p) == priority) {
            e.priority = p;
            found = true;
            break;
        }
    }
    if (!found) throw FormatError("bad priority '" + priority + "'");
    found = false;
    for (const Response r :
         {Response::none, Response::pause_workload, Response::alarm_high,
          Response::alarm_medium, Response::resume_workload}) {
        if (response_name(r) == response) {
            e.response = r;
            found = true;
            break;
        }
    }
    if (!found) throw FormatError("bad response '" + response + "'");
    e.score_min = textio::parse_double(smin, "event");
    e.score_max = textio::parse_double(smax, "event");
    return e;
}

void save_event_log(const std::vector<DetectionEvent>& events,
                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    for (const auto& e : events) out << format_event(e) << '\n';
    if (!out) throw FormatError("write failed for '" + path + "'");
}

}  // namespace redwatch
