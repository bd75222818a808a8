#include <doctest.h>

#include <cmath>

#include "redwatch/error.hpp"
#include "redwatch/eval.hpp"
#include "test_util.hpp"

using namespace redwatch;

namespace {

DetectionEvent event_at(double t, Verdict v) {
    DetectionEvent e;
    e.t_ms = t;
    e.stage = (v == Verdict::normal || v == Verdict::anomaly) ? Stage::step1
                                                              : Stage::step2;
    e.verdict = v;
    return e;
}

ExperimentConfig tiny_experiment() {
    ExperimentConfig cfg;
    cfg.n_samples = 300;
    cfg.seed = 7;
    cfg.w = 5;
    cfg.sweep_w = {1, 5};
    cfg.max_reference = 400;
    cfg.train.epochs = 2;
    cfg.train.hidden_dim = 12;
    cfg.train.history_len = 8;
    return cfg;
}

}  // namespace

TEST_CASE("compute_rates: trivial all-normal and all-attack endpoints") {
    const std::vector<TruthInterval> normal = {{0.0, 1000.0, false}};
    std::vector<DetectionEvent> quiet;
    for (int i = 0; i < 10; ++i) quiet.push_back(event_at(50.0 + i * 10, Verdict::normal));
    const ConfusionCounts a = compute_rates(quiet, normal, 20.0);
    CHECK(a.fpr() == 0.0);
    CHECK(a.tn == 10);

    const std::vector<TruthInterval> attack = {{0.0, 1000.0, true}};
    const ConfusionCounts b = compute_rates(quiet, attack, 20.0);
    CHECK(b.fnr() == 1.0);
    CHECK(b.fn == 10);
}

TEST_CASE("compute_rates matches a hand-counted confusion matrix") {
    const std::vector<TruthInterval> truth = {
        {0.0, 100.0, false}, {100.0, 200.0, true}, {200.0, 300.0, false}};
    const std::vector<DetectionEvent> events = {
        event_at(50.0, Verdict::normal),   // TN
        event_at(90.0, Verdict::case3),    // TN (resolved benign)
        event_at(110.0, Verdict::anomaly), // TP
        event_at(105.0, Verdict::normal),  // FN (window reaches the attack)
        event_at(250.0, Verdict::case2),   // FP
        event_at(150.0, Verdict::case4),   // TP (medium alarm still alarms)
    };
    const ConfusionCounts c = compute_rates(events, truth, 20.0);
    CHECK(c.tp == 2);
    CHECK(c.fn == 1);
    CHECK(c.tn == 2);
    CHECK(c.fp == 1);
    CHECK(c.fpr() == doctest::Approx(1.0 / 3.0));
    CHECK(c.fnr() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("compute_rates rejects uncovered timestamps and bad intervals") {
    const std::vector<TruthInterval> truth = {{0.0, 100.0, false}};
    CHECK_THROWS_AS(
        compute_rates({event_at(400.0, Verdict::normal)}, truth, 10.0),
        FormatError);
    const std::vector<TruthInterval> gappy = {{0.0, 100.0, false},
                                              {150.0, 200.0, true}};
    CHECK_THROWS_AS(
        compute_rates({event_at(50.0, Verdict::normal)}, gappy, 10.0),
        std::invalid_argument);
}

TEST_CASE("window decisions follow flags and majority votes") {
    ScenarioRun run;
    run.def = {"wl", std::nullopt, std::string("atk")};
    run.interval_ms = 10.0;
    const int n = 12;
    for (int i = 0; i < n; ++i) {
        run.t_ms.push_back(100.0 + 10.0 * i);
        run.step1_score.push_back(static_cast<double>(i));
    }
    //                 0  1  2  3  4  5  6  7  8  9 10 11
    run.step1_flag = {0, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1};
    run.attack_vote = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
    run.benign_vote = {1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 1};

    const auto events = window_decisions(run, 3);
    REQUIRE(events.size() == static_cast<std::size_t>(n - 2));

    // Window ending at 3: flags 1,1,1 -> flagged; votes a=0/3, b=3/3 -> case3.
    CHECK(events[1].stage == Stage::step2);
    CHECK(events[1].verdict == Verdict::case3);
    // Window ending at 4: flags 1,1,0 -> normal verdict.
    CHECK(events[2].stage == Stage::step1);
    CHECK(events[2].verdict == Verdict::normal);
    // Window ending at 8: flags all set; a votes 2/3 -> attack, b 1/3 -> case2.
    CHECK(events[6].verdict == Verdict::case2);
    // Window ending at 9: a=3/3, b=0/3 -> case2 again.
    CHECK(events[7].verdict == Verdict::case2);
    // Window ending at 11: a=3/3, b=1/3 -> case2; score range is the window.
    CHECK(events[9].score_min == 9.0);
    CHECK(events[9].score_max == 11.0);

    // Rates agree with compute_rates over the same events.
    const ConfusionCounts counts = window_rates(run, 3);
    CHECK(counts.tp + counts.fn == static_cast<long>(events.size()));
}

TEST_CASE("holdout evaluation validates its inputs") {
    const ExperimentConfig cfg = tiny_experiment();
    const ScenarioCatalog catalog = builtin_scenarios();
    const PredictorModel model = train_on_workloads(catalog, cfg);
    const DetectorBundle bundle =
        profile_detectors(catalog, model, cfg, default_known_attacks());

    CHECK_THROWS_AS(holdout_evaluation(catalog, model, bundle, {},
                                       default_heldout_attacks(), cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(holdout_evaluation(catalog, model, bundle,
                                       default_known_attacks(), {"l1pp"}, cfg),
                    std::invalid_argument);
    CHECK(holdout_evaluation(catalog, model, bundle, default_known_attacks(),
                             {}, cfg)
              .empty());

    const auto table = holdout_evaluation(
        catalog, model, bundle, default_known_attacks(), {"fr"}, cfg);
    REQUIRE(table.size() == 1);
    CHECK(table[0].name == "fr");
    CHECK(table[0].windows > 0);
    double total = 0.0;
    for (const double pct : table[0].case_pct) total += pct;
    CHECK(total == doctest::Approx(100.0));
}

TEST_CASE("a held-out clone of a known attack reads as a known attack") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.train.epochs = 4;
    ScenarioCatalog catalog = builtin_scenarios();

    // Same distribution as fr, different name, excluded from the known set.
    PerturbSpec clone = *catalog.find_perturb("fr");
    clone.name = "fr_clone";
    catalog.attacks.push_back(clone);

    std::vector<std::string> known;
    for (const auto& a : builtin_scenarios().attacks) known.push_back(a.name);

    const PredictorModel model = train_on_workloads(catalog, cfg);
    const DetectorBundle bundle = profile_detectors(catalog, model, cfg, known);
    const auto table =
        holdout_evaluation(catalog, model, bundle, known, {"fr_clone"}, cfg);
    REQUIRE(table.size() == 1);
    // Predominantly case 2: recognized by the attack detector, not benign.
    CHECK(table[0].case_pct[1] > 50.0);
    CHECK(table[0].case_pct[2] == 0.0);
}

TEST_CASE("a perturb far from every reference reads as a zero-day") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.train.epochs = 4;
    ScenarioCatalog catalog = builtin_scenarios();

    PerturbSpec weird;
    weird.name = "weird";
    weird.kind = PerturbKind::attack;
    weird.offset = Eigen::VectorXd::Zero(kEventCount);
    weird.offset[8] = 4.0e7;   // dtlb_write storm no preset has
    weird.offset[12] = 5.0e4;  // plus absurd context-switch rates
    weird.extra_noise = Eigen::VectorXd::Zero(kEventCount);
    weird.extra_noise[8] = 2.0e6;
    catalog.attacks.push_back(weird);

    std::vector<std::string> known;
    for (const auto& a : builtin_scenarios().attacks) known.push_back(a.name);

    const PredictorModel model = train_on_workloads(catalog, cfg);
    const DetectorBundle bundle = profile_detectors(catalog, model, cfg, known);
    const auto table =
        holdout_evaluation(catalog, model, bundle, known, {"weird"}, cfg);
    REQUIRE(table.size() == 1);
    CHECK(table[0].case_pct[3] > 50.0);
    CHECK(table[0].case_pct[2] == 0.0);
}

TEST_CASE("small experiment produces a consistent, deterministic report") {
    const ExperimentConfig cfg = tiny_experiment();
    const EvalReport report = run_experiment(cfg);

    CHECK(report.seed == cfg.seed);
    CHECK(report.scenario_rates.size() == 5u * (1 + 11 + 9));
    for (const auto& row : report.scenario_rates) {
        CHECK(row.counts.fpr() >= 0.0);
        CHECK(row.counts.fpr() <= 1.0);
        CHECK(row.counts.fnr() >= 0.0);
        CHECK(row.counts.fnr() <= 1.0);
        // Counts reconcile: every decided window lands in one bucket, and
        // single-interval truth puts scenarios entirely in one class.
        if (row.def.has_attack()) {
            CHECK(row.counts.fp + row.counts.tn == 0);
            CHECK(row.counts.tp + row.counts.fn > 0);
        } else {
            CHECK(row.counts.tp + row.counts.fn == 0);
            CHECK(row.counts.fp + row.counts.tn > 0);
        }
    }
    CHECK(report.zero_day.size() == default_heldout_attacks().size());

    // Sweep at the report's w matches the direct per-scenario rates.
    double fpr_sum = 0.0;
    long fpr_n = 0;
    for (const auto& row : report.scenario_rates) {
        if (!row.def.has_attack()) {
            fpr_sum += row.counts.fpr();
            ++fpr_n;
        }
    }
    for (const auto& row : report.sweep) {
        if (row.w == cfg.w && row.workload == "all") {
            CHECK(row.mean_fpr ==
                  doctest::Approx(fpr_sum / static_cast<double>(fpr_n)));
        }
    }

    const EvalReport again = run_experiment(cfg);
    CHECK(again.mean_attack_fnr == report.mean_attack_fnr);
    CHECK(again.mean_attack_free_fpr == report.mean_attack_free_fpr);
    CHECK(again.false_alarm_reduction == report.false_alarm_reduction);
}

TEST_CASE("report files are written with the documented headers") {
    testutil::TempDir tmp;
    EvalReport report;
    report.seed = 3;
    report.w = 5;
    ScenarioRates row;
    row.def = {"wl", std::nullopt, std::string("atk")};
    row.counts = {10, 0, 0, 2};
    report.scenario_rates.push_back(row);
    report.sweep.push_back({5, "all", 0.01, 0.02});
    report.case_distribution.push_back({"workload_attack", {0, 100, 0, 0}, 42});
    report.zero_day.push_back({"fr", {0, 80, 0, 20}, 50});
    write_report(report, tmp.dir());

    CHECK(testutil::read_file(tmp.file("scenario_rates.csv"))
              .rfind("scenario,workload,benign,attack,fp,tp,fn,tn,fpr,fnr\n",
                     0) == 0);
    CHECK(testutil::read_file(tmp.file("window_sweep.csv"))
              .rfind("w,workload,mean_fpr,mean_fnr\n", 0) == 0);
    CHECK(!testutil::read_file(tmp.file("latency.csv")).empty());
    const std::string summary = testutil::read_file(tmp.file("summary.txt"));
    CHECK(summary.find("experiment seed: 3") != std::string::npos);
}
