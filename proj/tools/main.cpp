// Command-line front end: offline training and profiling, online detection
// replay, and the desk-scale evaluation experiment.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "redwatch/error.hpp"
#include "redwatch/eval.hpp"
#include "redwatch/kde.hpp"
#include "redwatch/pca.hpp"
#include "redwatch/rng.hpp"
#include "redwatch/synth.hpp"
#include "redwatch/textio.hpp"

namespace fs = std::filesystem;
using namespace redwatch;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

struct SimulateArgs {
    std::string out_dir;
    long samples = 3000;
    std::uint64_t seed = 42;
    std::string catalog_file;
    std::string write_catalog;
};

int cmd_simulate(const SimulateArgs& args) {
    const ScenarioCatalog catalog = args.catalog_file.empty()
                                        ? builtin_scenarios()
                                        : load_catalog(args.catalog_file);
    if (!args.write_catalog.empty()) {
        save_catalog(catalog, args.write_catalog);
    }
    fs::create_directories(args.out_dir);
    std::ofstream index(args.out_dir + "/catalog.tsv", std::ios::binary);
    index << "file\tkind\tworkload\tbenign\tattack\n";

    auto emit = [&](const std::string& stem, const std::string& kind,
                    const std::optional<WorkloadSpec>& wl,
                    const std::vector<PerturbSpec>& perturbs,
                    const std::string& tag) {
        GenerateOptions opt;
        opt.n_samples = args.samples;
        opt.seed = derive_seed(args.seed, tag);
        const Trace trace = generate(wl, perturbs, opt);
        const std::string file = stem + ".csv";
        save_trace(trace, args.out_dir + "/" + file);
        index << file << '\t' << kind << '\t'
              << trace.label.workload.value_or("") << '\t'
              << trace.label.benign.value_or("") << '\t'
              << trace.label.attack.value_or("") << '\n';
    };

    for (const auto& w : catalog.workloads) {
        emit("train_" + w.name, "train", w, {}, "train/" + w.name);
    }
    for (const auto& w : catalog.workloads) {
        emit("s1_" + w.name, "scenario", w, {}, "scenario/" + w.name);
        emit("s2_" + w.name, "paused", catalog.idle_background, {},
             "scenario-paused/" + w.name);
        for (const auto& b : catalog.benign) {
            const std::string name = w.name + "+" + b.name;
            emit("s1_" + name, "scenario", w, {b}, "scenario/" + name);
            emit("s2_" + name, "paused", catalog.idle_background, {b},
                 "scenario-paused/" + name);
        }
        for (const auto& a : catalog.attacks) {
            const std::string name = w.name + "+" + a.name;
            emit("s1_" + name, "scenario", w, {a}, "scenario/" + name);
            emit("s2_" + name, "paused", catalog.idle_background, {a},
                 "scenario-paused/" + name);
        }
    }
    std::cout << "wrote scenario suite to " << args.out_dir << "\n";
    return 0;
}

ScenarioLabel label_from_flags(const std::string& workload,
                               const std::string& benign,
                               const std::string& attack) {
    ScenarioLabel label;
    if (!workload.empty()) label.workload = workload;
    if (!benign.empty()) label.benign = benign;
    if (!attack.empty()) label.attack = attack;
    if (!label.valid()) label.workload = "unspecified";
    return label;
}

struct TrainArgs {
    std::vector<std::string> traces;
    std::string out;
    TrainConfig cfg;
};

int cmd_train(const TrainArgs& args) {
    std::vector<Trace> traces;
    for (const auto& path : args.traces) {
        traces.push_back(load_trace(path, label_from_flags("train", "", "")));
    }
    const TrainResult result = train(traces, args.cfg);
    save_model(result.model, args.out);
    std::cout << "trained on " << traces.size() << " traces; first-epoch loss "
              << result.epoch_loss.front() << ", final "
              << result.epoch_loss.back() << "\n";
    return 0;
}

struct ProfileArgs {
    std::string model;
    std::vector<std::string> normal, attack, benign;
    std::string out_dir;
    double coverage = 0.80;
    int max_reference = 2000;
};

Eigen::MatrixXd cap_columns_cli(const Eigen::MatrixXd& m, int max_count) {
    if (max_count <= 0 || m.cols() <= max_count) return m;
    const Eigen::Index stride = (m.cols() + max_count - 1) / max_count;
    Eigen::MatrixXd out(m.rows(), (m.cols() + stride - 1) / stride);
    Eigen::Index o = 0;
    for (Eigen::Index c = 0; c < m.cols(); c += stride) out.col(o++) = m.col(c);
    return out;
}

int cmd_profile(const ProfileArgs& args) {
    const PredictorModel model = load_model(args.model);

    auto residual_split = [&](const std::vector<std::string>& paths,
                              const char* role) {
        std::vector<Eigen::MatrixXd> train_parts, val_parts;
        for (const auto& path : paths) {
            const Trace trace = load_trace(path, label_from_flags(role, "", ""));
            const ResidualSet res = compute_residuals(model, trace);
            const Eigen::Index n = res.count();
            if (n < 3) throw FormatError(path + ": too few residuals to split");
            const Eigen::Index b1 = n / 3;
            const Eigen::Index b2 = 2 * n / 3;
            train_parts.push_back(res.samples.leftCols(b1));
            val_parts.push_back(res.samples.middleCols(b1, b2 - b1));
        }
        Eigen::Index tc = 0, vc = 0;
        for (const auto& p : train_parts) tc += p.cols();
        for (const auto& p : val_parts) vc += p.cols();
        Eigen::MatrixXd train_m(model.input_dim, tc), val_m(model.input_dim, vc);
        Eigen::Index at = 0;
        for (const auto& p : train_parts) {
            train_m.middleCols(at, p.cols()) = p;
            at += p.cols();
        }
        at = 0;
        for (const auto& p : val_parts) {
            val_m.middleCols(at, p.cols()) = p;
            at += p.cols();
        }
        return std::pair(train_m, val_m);
    };

    const auto [n_train, n_val] = residual_split(args.normal, "normal");
    const auto [a_train, a_val] = residual_split(args.attack, "attack");
    const auto [b_train, b_val] = residual_split(args.benign, "benign");

    KdeDetector rd_n = KdeDetector::fit(
        ResidualSet{cap_columns_cli(n_train, args.max_reference), "normal"},
        DetectorKind::normal_workload);
    KdeDetector rd_a = KdeDetector::fit(
        ResidualSet{cap_columns_cli(a_train, args.max_reference), "attack"},
        DetectorKind::known_attack);
    KdeDetector rd_b = KdeDetector::fit(
        ResidualSet{cap_columns_cli(b_train, args.max_reference), "benign"},
        DetectorKind::benign_program);

    rd_n = rd_n.with_threshold(calibrate_quantile_threshold(
        rd_n, ResidualSet{n_val, "normal-val"}, args.coverage));
    rd_a = rd_a.with_threshold(calibrate_eer_threshold(
        rd_a, ResidualSet{a_val, "attack-val"}, ResidualSet{b_val, "benign-val"}));
    rd_b = rd_b.with_threshold(calibrate_eer_threshold(
        rd_b, ResidualSet{b_val, "benign-val"}, ResidualSet{a_val, "attack-val"}));

    fs::create_directories(args.out_dir);
    save_detector(rd_n, args.out_dir + "/rd_n.txt");
    save_detector(rd_a, args.out_dir + "/rd_a.txt");
    save_detector(rd_b, args.out_dir + "/rd_b.txt");
    std::cout << "profiles written to " << args.out_dir << " (thresholds: n="
              << rd_n.threshold() << ", a=" << rd_a.threshold()
              << ", b=" << rd_b.threshold() << ")\n";
    return 0;
}

struct DetectArgs {
    std::string model;
    std::string profiles_dir;
    std::string trace;
    std::string paused;
    std::string out;
    int window = 5;
};

int cmd_detect(const DetectArgs& args) {
    const PredictorModel model = load_model(args.model);
    DetectorBundle bundle{load_detector(args.profiles_dir + "/rd_n.txt"),
                          load_detector(args.profiles_dir + "/rd_a.txt"),
                          load_detector(args.profiles_dir + "/rd_b.txt")};
    ScenarioTraces scenario{
        load_trace(args.trace, label_from_flags("monitored", "", "")),
        load_trace(args.paused, label_from_flags("paused", "", ""))};
    EngineConfig cfg;
    cfg.window = args.window;
    cfg.interval_ms = scenario.active.interval_ms() > 0.0
                          ? scenario.active.interval_ms()
                          : cfg.interval_ms;
    cfg.pause_gap_ms = cfg.interval_ms;
    const auto events = replay_scenario(scenario, model, bundle, cfg);
    save_event_log(events, args.out);
    std::cout << events.size() << " events written to " << args.out << "\n";
    return 0;
}

struct SelectArgs {
    std::vector<std::string> traces;
    std::string universe = "34";
    double threshold = 0.01;
    std::string out;
    bool raw_covariance = false;
};

int cmd_select_features(const SelectArgs& args) {
    std::map<std::string, Eigen::MatrixXd> per_workload;
    std::vector<std::string> columns;
    for (const auto& path : args.traces) {
        NamedMatrix m = load_named_matrix(path);
        if (columns.empty()) {
            columns.assign(m.columns.begin() + 1, m.columns.end());
        } else if (!std::equal(columns.begin(), columns.end(),
                               m.columns.begin() + 1, m.columns.end())) {
            throw FormatError(path + ": column schema differs across workloads");
        }
        per_workload[fs::path(path).stem().string()] =
            m.values.rightCols(m.values.cols() - 1);
    }

    EventUniverse universe;
    if (args.universe == "34") {
        universe = EventUniverse::full();
        if (columns != universe.events) {
            throw FormatError(
                "input columns do not match the 34-counter universe; pass "
                "--universe trace to rank the input schema as-is");
        }
    } else if (args.universe == "trace") {
        universe.events = columns;
    } else {
        std::ifstream in(args.universe);
        if (!in) throw FormatError("cannot open universe file '" + args.universe + "'");
        std::string name;
        while (std::getline(in, name)) {
            if (!name.empty() && name.back() == '\r') name.pop_back();
            if (!name.empty()) universe.events.push_back(name);
        }
        if (columns != universe.events) {
            throw FormatError("input columns do not match the universe file");
        }
    }

    const ImportanceReport report =
        select_features(per_workload, universe, args.threshold);
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + args.out + "'");
    out << report.to_csv();
    std::cout << "selected " << report.selected.size() << " of "
              << universe.events.size() << " events -> " << args.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string out_dir;
    ExperimentConfig cfg;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const EvalReport report = run_experiment(args.cfg);
    write_report(report, args.out_dir);
    std::cout << "report written to " << args.out_dir << "\n"
              << "  mean attack FNR:        " << report.mean_attack_fnr << "\n"
              << "  mean attack-free FPR:   " << report.mean_attack_free_fpr << "\n"
              << "  false-alarm reduction:  " << report.false_alarm_reduction
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavior-trace anomaly and attack detection pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Write the synthetic scenario suite as trace CSVs");
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--samples", sim.samples, "Samples per trace")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "Experiment seed");
    simulate->add_option("--catalog", sim.catalog_file,
                         "Scenario catalog file (default: built-in presets)")
        ->check(CLI::ExistingFile);
    simulate->add_option("--write-catalog", sim.write_catalog,
                         "Also export the catalog to this file");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Fit the predictor model");
    train_cmd->add_option("--traces", tr.traces, "Training trace CSVs")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr.out, "Model file to write")->required();
    train_cmd->add_option("--epochs", tr.cfg.epochs)->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tr.cfg.learning_rate)->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", tr.cfg.batch_size)->check(CLI::PositiveNumber);
    train_cmd->add_option("--hidden", tr.cfg.hidden_dim)->check(CLI::PositiveNumber);
    train_cmd->add_option("--history", tr.cfg.history_len)->check(CLI::PositiveNumber);
    train_cmd->add_option("--clip", tr.cfg.clip_norm)->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", tr.cfg.seed, "Training seed");

    ProfileArgs pr;
    auto* profile = app.add_subcommand(
        "profile", "Build and calibrate the three reference detectors");
    profile->add_option("--model", pr.model)->required()->check(CLI::ExistingFile);
    profile->add_option("--normal", pr.normal, "Clean workload traces")
        ->required()
        ->check(CLI::ExistingFile);
    profile->add_option("--attack", pr.attack, "Attack-only traces")
        ->required()
        ->check(CLI::ExistingFile);
    profile->add_option("--benign", pr.benign, "Benign-only traces")
        ->required()
        ->check(CLI::ExistingFile);
    profile->add_option("--out", pr.out_dir, "Profile directory")->required();
    profile->add_option("--coverage", pr.coverage,
                        "Normal-detector calibration coverage")
        ->check(CLI::Range(0.01, 0.99));
    profile->add_option("--max-reference", pr.max_reference,
                        "Reference sample cap per detector");

    DetectArgs de;
    auto* detect = app.add_subcommand(
        "detect", "Replay a recorded scenario through the online engine");
    detect->add_option("--model", de.model)->required()->check(CLI::ExistingFile);
    detect->add_option("--profiles", de.profiles_dir, "Profile directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    detect->add_option("--trace", de.trace, "Monitored trace CSV")
        ->required()
        ->check(CLI::ExistingFile);
    detect->add_option("--paused", de.paused,
                       "Aligned workload-off trace CSV for pause windows")
        ->required()
        ->check(CLI::ExistingFile);
    detect->add_option("--out", de.out, "Event log file")->required();
    detect->add_option("--w", de.window, "Decision window")->check(CLI::PositiveNumber);

    SelectArgs se;
    auto* select = app.add_subcommand(
        "select-features", "Rank counters by leading-component importance");
    select->add_option("--traces", se.traces, "One named-column CSV per workload")
        ->required()
        ->check(CLI::ExistingFile);
    select->add_option("--universe", se.universe,
                       "'34' (default), 'trace', or a file of event names");
    select->add_option("--threshold", se.threshold, "Importance cutoff");
    select->add_option("--out", se.out, "Report CSV")->required();

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Run the full desk-scale experiment and write the report");
    evaluate->add_option("--out", ev.out_dir, "Report directory")->required();
    evaluate->add_option("--samples", ev.cfg.n_samples, "Samples per trace")
        ->check(CLI::PositiveNumber);
    evaluate->add_option("--seed", ev.cfg.seed, "Experiment seed");
    evaluate->add_option("--w", ev.cfg.w, "Decision window")->check(CLI::PositiveNumber);
    evaluate->add_option("--sweep", ev.cfg.sweep_w, "Window sizes to sweep");
    evaluate->add_option("--epochs", ev.cfg.train.epochs)->check(CLI::PositiveNumber);
    evaluate->add_option("--max-reference", ev.cfg.max_reference,
                         "Reference sample cap per detector");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (train_cmd->parsed()) return cmd_train(tr);
        if (profile->parsed()) return cmd_profile(pr);
        if (detect->parsed()) return cmd_detect(de);
        if (select->parsed()) return cmd_select_features(se);
        if (evaluate->parsed()) return cmd_evaluate(ev);
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
