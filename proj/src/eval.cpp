#include "redwatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/residuals.hpp"
#include "redwatch/rng.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace {

bool is_alarm(const DetectionEvent& e) {
    switch (e.verdict) {
        case Verdict::anomaly:
        case Verdict::case1:
        case Verdict::case2:
        case Verdict::case4:
            return true;
        case Verdict::normal:
        case Verdict::case3:
            return false;
    }
    return false;
}

void validate_truth(const std::vector<TruthInterval>& truth) {
    if (truth.empty()) throw std::invalid_argument("empty truth intervals");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!(truth[i].t_end > truth[i].t_begin)) {
            throw std::invalid_argument("truth interval must have positive length");
        }
        if (i > 0 && std::abs(truth[i].t_begin - truth[i - 1].t_end) > 1e-9) {
            throw std::invalid_argument("truth intervals must tile the trace");
        }
    }
}

/// Column subsample capped at max_count, deterministic stride.
Eigen::MatrixXd cap_columns(const Eigen::MatrixXd& m, int max_count) {
    if (max_count <= 0 || m.cols() <= max_count) return m;
    const Eigen::Index stride = (m.cols() + max_count - 1) / max_count;
    const Eigen::Index kept = (m.cols() + stride - 1) / stride;
    Eigen::MatrixXd out(m.rows(), kept);
    Eigen::Index o = 0;
    for (Eigen::Index c = 0; c < m.cols(); c += stride) out.col(o++) = m.col(c);
    return out;
}

struct Thirds {
    Eigen::MatrixXd train;
    Eigen::MatrixXd validation;
    Eigen::MatrixXd test;
};

Thirds split_thirds(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.cols();
    if (n < 3) throw FormatError("need at least 3 residuals to split");
    const Eigen::Index b1 = static_cast<Eigen::Index>(std::lround(n / 3.0));
    const Eigen::Index b2 = static_cast<Eigen::Index>(std::lround(2.0 * n / 3.0));
    return {m.leftCols(b1), m.middleCols(b1, b2 - b1), m.rightCols(n - b2)};
}

Eigen::MatrixXd hcat(const std::vector<Eigen::MatrixXd>& blocks) {
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Eigen::MatrixXd out(blocks.front().rows(), cols);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return out;
}

std::vector<std::string> resolve_attacks(const ScenarioCatalog& catalog,
                                         const std::vector<std::string>& names) {
    if (names.empty()) {
        std::vector<std::string> all;
        for (const auto& a : catalog.attacks) all.push_back(a.name);
        return all;
    }
    for (const auto& n : names) {
        const PerturbSpec* p = catalog.find_perturb(n);
        if (p == nullptr || p->kind != PerturbKind::attack) {
            throw std::invalid_argument("unknown attack '" + n + "'");
        }
    }
    return names;
}

ResidualSet profile_residuals(const ScenarioCatalog& catalog,
                              const PredictorModel& model,
                              const ExperimentConfig& cfg,
                              const std::optional<WorkloadSpec>& workload,
                              const std::vector<PerturbSpec>& perturbs,
                              const std::string& tag) {
    GenerateOptions opt;
    opt.n_samples = cfg.n_samples;
    opt.seed = derive_seed(cfg.seed, tag);
    (void)catalog;
    return compute_residuals(model, generate(workload, perturbs, opt));
}

struct WindowStats {
    // Prefix sums over per-sample signals, for O(1) window queries.
    std::vector<long> flags;
    std::vector<long> attack;
    std::vector<long> benign;

    explicit WindowStats(const ScenarioRun& run) {
        const std::size_t n = run.step1_flag.size();
        flags.assign(n + 1, 0);
        attack.assign(n + 1, 0);
        benign.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            flags[i + 1] = flags[i] + (run.step1_flag[i] ? 1 : 0);
            attack[i + 1] = attack[i] + (run.attack_vote[i] ? 1 : 0);
            benign[i + 1] = benign[i] + (run.benign_vote[i] ? 1 : 0);
        }
    }

    long count(const std::vector<long>& p, std::size_t end_idx, int w) const {
        return p[end_idx + 1] - p[end_idx + 1 - static_cast<std::size_t>(w)];
    }
};

}  // namespace

void ExperimentConfig::validate() const {
    if (n_samples < 3 * (train.history_len + 1)) {
        throw std::invalid_argument("n_samples too small for profiling splits");
    }
    if (w < 1) throw std::invalid_argument("w must be >= 1");
    if (sweep_w.empty()) throw std::invalid_argument("sweep_w must be non-empty");
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw std::invalid_argument("coverage must be in (0, 1)");
    }
    train.validate();
}

std::string ScenarioDef::name() const {
    std::string n = workload;
    if (benign) n += "+" + *benign;
    if (attack) n += "+" + *attack;
    return n;
}

ConfusionCounts compute_rates(const std::vector<DetectionEvent>& decisions,
                              const std::vector<TruthInterval>& truth,
                              double window_ms) {
    validate_truth(truth);
    if (window_ms < 0.0) throw std::invalid_argument("window_ms must be >= 0");
    const double lo = truth.front().t_begin;
    const double hi = truth.back().t_end;

    ConfusionCounts counts;
    for (const auto& e : decisions) {
        const double begin = e.t_ms - window_ms;
        if (begin < lo - 1e-9 || e.t_ms > hi + 1e-9) {
            throw FormatError("decision at t=" + std::to_string(e.t_ms) +
                              " not covered by truth intervals");
        }
        bool attack_window = false;
        for (const auto& iv : truth) {
            if (!iv.attack) continue;
            if (iv.t_begin <= e.t_ms && begin < iv.t_end) {
                attack_window = true;
                break;
            }
        }
        const bool alarm = is_alarm(e);
        if (attack_window) {
            alarm ? ++counts.tp : ++counts.fn;
        } else {
            alarm ? ++counts.fp : ++counts.tn;
        }
    }
    return counts;
}

PredictorModel train_on_workloads(const ScenarioCatalog& catalog,
                                  const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<Trace> traces;
    for (const auto& w : catalog.workloads) {
        GenerateOptions opt;
        opt.n_samples = cfg.n_samples;
        opt.seed = derive_seed(cfg.seed, "train/" + w.name);
        traces.push_back(generate(w, {}, opt));
    }
    return train(traces, cfg.train).model;
}

DetectorBundle profile_detectors(const ScenarioCatalog& catalog,
                                 const PredictorModel& model,
                                 const ExperimentConfig& cfg,
                                 const std::vector<std::string>& known_attacks) {
    cfg.validate();
    const auto attack_names = resolve_attacks(catalog, known_attacks);

    std::vector<Eigen::MatrixXd> n_train, n_val;
    for (const auto& w : catalog.workloads) {
        const ResidualSet r = profile_residuals(catalog, model, cfg, w, {},
                                                "profile-normal/" + w.name);
        const Thirds t = split_thirds(r.samples);
        n_train.push_back(t.train);
        n_val.push_back(t.validation);
    }

    std::vector<Eigen::MatrixXd> a_train, a_val;
    for (const auto& name : attack_names) {
        const PerturbSpec* spec = catalog.find_perturb(name);
        const ResidualSet r =
            profile_residuals(catalog, model, cfg, catalog.idle_background,
                              {*spec}, "profile-attack/" + name);
        const Thirds t = split_thirds(r.samples);
        a_train.push_back(t.train);
        a_val.push_back(t.validation);
    }

    std::vector<Eigen::MatrixXd> b_train, b_val;
    for (const auto& spec : catalog.benign) {
        const ResidualSet r =
            profile_residuals(catalog, model, cfg, catalog.idle_background,
                              {spec}, "profile-benign/" + spec.name);
        const Thirds t = split_thirds(r.samples);
        b_train.push_back(t.train);
        b_val.push_back(t.validation);
    }

    ResidualSet n_ref{cap_columns(hcat(n_train), cfg.max_reference), "normal"};
    ResidualSet a_ref{cap_columns(hcat(a_train), cfg.max_reference), "attack"};
    ResidualSet b_ref{cap_columns(hcat(b_train), cfg.max_reference), "benign"};

    KdeDetector rd_n = KdeDetector::fit(n_ref, DetectorKind::normal_workload);
    KdeDetector rd_a = KdeDetector::fit(a_ref, DetectorKind::known_attack);
    KdeDetector rd_b = KdeDetector::fit(b_ref, DetectorKind::benign_program);

    const ResidualSet n_validation{hcat(n_val), "normal-val"};
    const ResidualSet a_validation{hcat(a_val), "attack-val"};
    const ResidualSet b_validation{hcat(b_val), "benign-val"};

    rd_n = rd_n.with_threshold(
        calibrate_quantile_threshold(rd_n, n_validation, cfg.coverage));
    rd_a = rd_a.with_threshold(
        calibrate_eer_threshold(rd_a, a_validation, b_validation));
    rd_b = rd_b.with_threshold(
        calibrate_eer_threshold(rd_b, b_validation, a_validation));

    return DetectorBundle{std::move(rd_n), std::move(rd_a), std::move(rd_b)};
}

ScenarioRun score_scenario(const ScenarioCatalog& catalog,
                           const PredictorModel& model,
                           const DetectorBundle& detectors,
                           const ScenarioDef& def,
                           const ExperimentConfig& cfg) {
    const WorkloadSpec* workload = catalog.find_workload(def.workload);
    if (workload == nullptr) {
        throw std::invalid_argument("unknown workload '" + def.workload + "'");
    }
    std::vector<PerturbSpec> perturbs;
    for (const auto& name : {def.benign, def.attack}) {
        if (!name) continue;
        const PerturbSpec* p = catalog.find_perturb(*name);
        if (p == nullptr) {
            throw std::invalid_argument("unknown perturb '" + *name + "'");
        }
        perturbs.push_back(*p);
    }

    GenerateOptions active_opt;
    active_opt.n_samples = cfg.n_samples;
    active_opt.seed = derive_seed(cfg.seed, "scenario/" + def.name());
    const Trace active = generate(*workload, perturbs, active_opt);

    GenerateOptions paused_opt = active_opt;
    paused_opt.seed = derive_seed(cfg.seed, "scenario-paused/" + def.name());
    const Trace paused = generate(catalog.idle_background, perturbs, paused_opt);

    const ResidualSet active_res = compute_residuals(model, active);
    const ResidualSet paused_res = compute_residuals(model, paused);

    ScenarioRun run;
    run.def = def;
    run.interval_ms = active_opt.interval_ms;
    const std::size_t n = static_cast<std::size_t>(active_res.count());
    run.t_ms.resize(n);
    run.step1_score.resize(n);
    run.step1_flag.resize(n);
    run.attack_vote.resize(n);
    run.benign_vote.resize(n);
    const int L = model.history_len;
    for (std::size_t i = 0; i < n; ++i) {
        run.t_ms[i] = active.samples[i + static_cast<std::size_t>(L)].t_ms;
        const double score =
            detectors.normal.anomaly_score(active_res.samples.col(static_cast<Eigen::Index>(i)));
        run.step1_score[i] = score;
        run.step1_flag[i] = score > detectors.normal.threshold() ? 1 : 0;
        const auto paused_col = paused_res.samples.col(static_cast<Eigen::Index>(i));
        run.attack_vote[i] = detectors.attack.accepts(paused_col) ? 1 : 0;
        run.benign_vote[i] = detectors.benign.accepts(paused_col) ? 1 : 0;
    }
    return run;
}

std::vector<DetectionEvent> window_decisions(const ScenarioRun& run, int w) {
    if (w < 1) throw std::invalid_argument("w must be >= 1");
    const std::size_t n = run.step1_flag.size();
    std::vector<DetectionEvent> events;
    if (n < static_cast<std::size_t>(w)) return events;
    const WindowStats stats(run);

    // Rolling window min/max of step-1 scores via monotonic deques.
    std::deque<std::size_t> min_q, max_q;
    for (std::size_t j = 0; j < n; ++j) {
        while (!min_q.empty() && run.step1_score[min_q.back()] >= run.step1_score[j])
            min_q.pop_back();
        min_q.push_back(j);
        while (!max_q.empty() && run.step1_score[max_q.back()] <= run.step1_score[j])
            max_q.pop_back();
        max_q.push_back(j);
        if (j + 1 < static_cast<std::size_t>(w)) continue;
        const std::size_t lo = j + 1 - static_cast<std::size_t>(w);
        while (min_q.front() < lo) min_q.pop_front();
        while (max_q.front() < lo) max_q.pop_front();

        DetectionEvent e;
        e.t_ms = run.t_ms[j];
        e.score_min = run.step1_score[min_q.front()];
        e.score_max = run.step1_score[max_q.front()];
        if (stats.count(stats.flags, j, w) == w) {
            const bool attack_vote = 2 * stats.count(stats.attack, j, w) > w;
            const bool benign_vote = 2 * stats.count(stats.benign, j, w) > w;
            const CaseDecision d = classify_case(attack_vote, benign_vote);
            e.stage = Stage::step2;
            e.verdict = d.verdict;
            e.priority = d.priority;
            e.response = d.response;
        } else {
            e.stage = Stage::step1;
            e.verdict = Verdict::normal;
        }
        events.push_back(e);
    }
    return events;
}

std::vector<TruthInterval> scenario_truth(const ScenarioRun& run) {
    if (run.t_ms.empty()) throw std::invalid_argument("empty scenario run");
    TruthInterval iv;
    iv.t_begin = 0.0;
    iv.t_end = run.t_ms.back() + run.interval_ms;
    iv.attack = run.def.has_attack();
    return {iv};
}

ConfusionCounts window_rates(const ScenarioRun& run, int w) {
    return compute_rates(window_decisions(run, w), scenario_truth(run),
                         static_cast<double>(w - 1) * run.interval_ms);
}

const std::vector<std::string>& default_known_attacks() {
    static const std::vector<std::string> known = {
        "l1pp", "l3pp", "spectre_v1", "spectre_v2", "buffer_overflow"};
    return known;
}

const std::vector<std::string>& default_heldout_attacks() {
    static const std::vector<std::string> heldout = {"fr", "ff", "spectre_v3",
                                                     "spectre_v4"};
    return heldout;
}

std::vector<CaseDistribution> holdout_evaluation(
    const ScenarioCatalog& catalog, const PredictorModel& model,
    const DetectorBundle& known_bundle,
    const std::vector<std::string>& known_attacks,
    const std::vector<std::string>& heldout_attacks,
    const ExperimentConfig& cfg) {
    if (known_attacks.empty()) {
        throw std::invalid_argument("known attack set must be non-empty");
    }
    const std::set<std::string> known(known_attacks.begin(), known_attacks.end());
    for (const auto& h : heldout_attacks) {
        if (known.count(h) > 0) {
            throw std::invalid_argument("held-out attack '" + h +
                                        "' is also in the known set");
        }
    }

    std::vector<CaseDistribution> table;
    for (const auto& name : heldout_attacks) {
        const PerturbSpec* spec = catalog.find_perturb(name);
        if (spec == nullptr || spec->kind != PerturbKind::attack) {
            throw std::invalid_argument("unknown attack '" + name + "'");
        }
        GenerateOptions opt;
        opt.n_samples = cfg.n_samples;
        opt.seed = derive_seed(cfg.seed, "holdout/" + name);
        const Trace paused = generate(catalog.idle_background, {*spec}, opt);
        const ResidualSet res = compute_residuals(model, paused);

        const std::size_t n = static_cast<std::size_t>(res.count());
        std::vector<long> attack_pref(n + 1, 0), benign_pref(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto col = res.samples.col(static_cast<Eigen::Index>(i));
            attack_pref[i + 1] =
                attack_pref[i] + (known_bundle.attack.accepts(col) ? 1 : 0);
            benign_pref[i + 1] =
                benign_pref[i] + (known_bundle.benign.accepts(col) ? 1 : 0);
        }

        CaseDistribution dist;
        dist.name = name;
        const int w = cfg.w;
        std::array<long, 4> hits = {0, 0, 0, 0};
        long windows = 0;
        for (std::size_t j = static_cast<std::size_t>(w) - 1; j < n; ++j) {
            const long a = attack_pref[j + 1] - attack_pref[j + 1 - static_cast<std::size_t>(w)];
            const long b = benign_pref[j + 1] - benign_pref[j + 1 - static_cast<std::size_t>(w)];
            const CaseDecision d = classify_case(2 * a > w, 2 * b > w);
            ++hits[static_cast<std::size_t>(static_cast<int>(d.verdict) -
                                            static_cast<int>(Verdict::case1))];
            ++windows;
        }
        dist.windows = windows;
        for (int c = 0; c < 4; ++c) {
            dist.case_pct[static_cast<std::size_t>(c)] =
                windows > 0 ? 100.0 * static_cast<double>(hits[static_cast<std::size_t>(c)]) /
                                  static_cast<double>(windows)
                            : 0.0;
        }
        table.push_back(std::move(dist));
    }
    return table;
}

namespace {

CaseDistribution pooled_case_distribution(
    const std::string& name, const std::vector<const ScenarioRun*>& runs, int w) {
    CaseDistribution dist;
    dist.name = name;
    std::array<long, 4> hits = {0, 0, 0, 0};
    long flagged = 0;
    for (const ScenarioRun* run : runs) {
        for (const auto& e : window_decisions(*run, w)) {
            if (e.stage != Stage::step2) continue;
            ++flagged;
            ++hits[static_cast<std::size_t>(static_cast<int>(e.verdict) -
                                            static_cast<int>(Verdict::case1))];
        }
    }
    dist.windows = flagged;
    for (int c = 0; c < 4; ++c) {
        dist.case_pct[static_cast<std::size_t>(c)] =
            flagged > 0 ? 100.0 * static_cast<double>(hits[static_cast<std::size_t>(c)]) /
                              static_cast<double>(flagged)
                        : 0.0;
    }
    return dist;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const ScenarioCatalog catalog = builtin_scenarios();
    const PredictorModel model = train_on_workloads(catalog, cfg);
    const DetectorBundle bundle = profile_detectors(catalog, model, cfg);

    std::vector<ScenarioDef> defs;
    for (const auto& w : catalog.workloads) {
        defs.push_back({w.name, std::nullopt, std::nullopt});
        for (const auto& b : catalog.benign) {
            defs.push_back({w.name, b.name, std::nullopt});
        }
        for (const auto& a : catalog.attacks) {
            defs.push_back({w.name, std::nullopt, a.name});
        }
    }

    std::vector<ScenarioRun> runs;
    runs.reserve(defs.size());
    for (const auto& def : defs) {
        runs.push_back(score_scenario(catalog, model, bundle, def, cfg));
    }

    EvalReport report;
    report.seed = cfg.seed;
    report.w = cfg.w;

    double fnr_sum = 0.0, fpr_sum = 0.0;
    long fnr_count = 0, fpr_count = 0;
    for (const auto& run : runs) {
        ScenarioRates row;
        row.def = run.def;
        row.counts = window_rates(run, cfg.w);
        if (run.def.has_attack()) {
            fnr_sum += row.counts.fnr();
            ++fnr_count;
        } else {
            fpr_sum += row.counts.fpr();
            ++fpr_count;
        }
        report.scenario_rates.push_back(std::move(row));
    }
    report.mean_attack_fnr = fnr_count ? fnr_sum / static_cast<double>(fnr_count) : 0.0;
    report.mean_attack_free_fpr =
        fpr_count ? fpr_sum / static_cast<double>(fpr_count) : 0.0;

    // Window sweep: unweighted scenario means, per workload and pooled.
    for (const int w : cfg.sweep_w) {
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> acc;
        for (const auto& run : runs) {
            const ConfusionCounts counts = window_rates(run, w);
            auto& [fprs, fnrs] = acc[run.def.workload];
            if (run.def.has_attack()) fnrs.push_back(counts.fnr());
            else fprs.push_back(counts.fpr());
            auto& [all_fprs, all_fnrs] = acc["all"];
            if (run.def.has_attack()) all_fnrs.push_back(counts.fnr());
            else all_fprs.push_back(counts.fpr());
        }
        for (const auto& [workload, lists] : acc) {
            SweepRow row;
            row.w = w;
            row.workload = workload;
            const auto mean = [](const std::vector<double>& v) {
                return v.empty() ? 0.0
                                 : std::accumulate(v.begin(), v.end(), 0.0) /
                                       static_cast<double>(v.size());
            };
            row.mean_fpr = mean(lists.first);
            row.mean_fnr = mean(lists.second);
            report.sweep.push_back(std::move(row));
        }
    }

    // Step-2 case mix of flagged windows, by scenario class.
    std::vector<const ScenarioRun*> normal_runs, benign_runs, attack_runs;
    for (const auto& run : runs) {
        if (run.def.has_attack()) attack_runs.push_back(&run);
        else if (run.def.benign) benign_runs.push_back(&run);
        else normal_runs.push_back(&run);
    }
    report.case_distribution.push_back(
        pooled_case_distribution("workload_only", normal_runs, cfg.w));
    report.case_distribution.push_back(
        pooled_case_distribution("workload_benign", benign_runs, cfg.w));
    report.case_distribution.push_back(
        pooled_case_distribution("workload_attack", attack_runs, cfg.w));

    // Share of benign-scenario step-1 alarms the second stage resolves.
    {
        const CaseDistribution& benign_mix = report.case_distribution[1];
        report.false_alarm_reduction =
            benign_mix.windows > 0 ? benign_mix.case_pct[2] / 100.0 : 1.0;
    }

    const DetectorBundle known_bundle =
        profile_detectors(catalog, model, cfg, default_known_attacks());
    report.zero_day =
        holdout_evaluation(catalog, model, known_bundle, default_known_attacks(),
                           default_heldout_attacks(), cfg);
    return report;
}

void write_report(const EvalReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    auto open = [&](const std::string& name) {
        std::ofstream out(dir + "/" + name, std::ios::binary);
        if (!out) throw FormatError("cannot write '" + dir + "/" + name + "'");
        return out;
    };

    {
        auto out = open("scenario_rates.csv");
        out << "scenario,workload,benign,attack,fp,tp,fn,tn,fpr,fnr\n";
        for (const auto& row : report.scenario_rates) {
            out << row.def.name() << ',' << row.def.workload << ','
                << row.def.benign.value_or("") << ',' << row.def.attack.value_or("")
                << ',' << row.counts.fp << ',' << row.counts.tp << ','
                << row.counts.fn << ',' << row.counts.tn << ','
                << textio::format_double(row.counts.fpr()) << ','
                << textio::format_double(row.counts.fnr()) << '\n';
        }
    }
    {
        auto out = open("window_sweep.csv");
        out << "w,workload,mean_fpr,mean_fnr\n";
        for (const auto& row : report.sweep) {
            out << row.w << ',' << row.workload << ','
                << textio::format_double(row.mean_fpr) << ','
                << textio::format_double(row.mean_fnr) << '\n';
        }
    }
    {
        auto out = open("case_distribution.csv");
        out << "class,flagged_windows,case1_pct,case2_pct,case3_pct,case4_pct\n";
        for (const auto& d : report.case_distribution) {
            out << d.name << ',' << d.windows;
            for (const double pct : d.case_pct) {
                out << ',' << textio::format_double(pct);
            }
            out << '\n';
        }
    }
    {
        auto out = open("zero_day.csv");
        out << "attack,windows,case1_pct,case2_pct,case3_pct,case4_pct\n";
        for (const auto& d : report.zero_day) {
            out << d.name << ',' << d.windows;
            for (const double pct : d.case_pct) {
                out << ',' << textio::format_double(pct);
            }
            out << '\n';
        }
    }
    {
        auto out = open("latency.csv");
        out << "w,no_anomaly_ms,attack_ms\n";
        for (const auto& preset : reference_stage_presets()) {
            EngineConfig cfg;
            cfg.window = preset.window;
            cfg.t_red_ms = preset.t_red_ms;
            cfg.t_kde1_ms = preset.t_kde1_ms;
            cfg.t_kde2_ms = preset.t_kde2_ms;
            out << preset.window << ','
                << textio::format_double(latency_model(cfg, false)) << ','
                << textio::format_double(latency_model(cfg, true)) << '\n';
        }
    }
    {
        auto out = open("summary.txt");
        out << "experiment seed: " << report.seed << "\n";
        out << "window size: " << report.w << "\n";
        out << "scenario count: " << report.scenario_rates.size() << "\n";
        out << "mean FNR over attack scenarios (unweighted): "
            << textio::format_double(report.mean_attack_fnr) << "\n";
        out << "mean FPR over attack-free scenarios (unweighted): "
            << textio::format_double(report.mean_attack_free_fpr) << "\n";
        out << "benign false alarms resolved by second stage: "
            << textio::format_double(report.false_alarm_reduction) << "\n";
        out << "zero-day holdout:\n";
        for (const auto& d : report.zero_day) {
            out << "  " << d.name << ": case1 " << d.case_pct[0] << "%, case2 "
                << d.case_pct[1] << "%, case3 " << d.case_pct[2] << "%, case4 "
                << d.case_pct[3] << "%\n";
        }
    }
}

}  // namespace redwatch
