#include "redwatch/synth.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/rng.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::VectorXd vec13(std::initializer_list<std::pair<int, double>> entries) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kEventCount);
    for (const auto& [idx, val] : entries) v[idx] = val;
    return v;
}

// Event indices, for readability of the preset tables below.
enum : int {
    I_INSTR = 0, I_STALL_I, I_STALL_R, I_CYCLES, I_LOAD, I_DTLB_R, I_STORE,
    I_BPU, I_DTLB_W, I_BRANCH, I_L1D, I_L1I, I_CTX,
};

void check_vec(const Eigen::VectorXd& v, const std::string& what) {
    if (v.size() != kEventCount) {
        throw std::invalid_argument(what + " must have " +
                                    std::to_string(kEventCount) + " entries");
    }
    if (!v.allFinite()) throw std::invalid_argument(what + " must be finite");
}

}  // namespace

void WorkloadSpec::validate() const {
    check_vec(baseline, name + ": baseline");
    check_vec(noise_scale, name + ": noise_scale");
    if ((baseline.array() < 0.0).any()) {
        throw std::invalid_argument(name + ": baseline must be >= 0");
    }
    if ((noise_scale.array() <= 0.0).any()) {
        throw std::invalid_argument(name + ": noise_scale must be > 0");
    }
    for (const auto& term : periodic) {
        if (term.event < 0 || term.event >= kEventCount) {
            throw std::invalid_argument(name + ": periodic term event out of range");
        }
        if (term.amplitude < 0.0) {
            throw std::invalid_argument(name + ": periodic amplitude must be >= 0");
        }
        if (term.period < 2.0) {
            throw std::invalid_argument(name + ": periodic period must be >= 2 samples");
        }
    }
}

double WorkloadSpec::deterministic_at(int event, long sample_index) const {
    double v = baseline[event];
    for (const auto& term : periodic) {
        if (term.event != event) continue;
        v += term.amplitude *
             std::sin(kTwoPi * static_cast<double>(sample_index) / term.period +
                      term.phase);
    }
    return v;
}

void PerturbSpec::validate() const {
    check_vec(offset, name + ": offset");
    check_vec(extra_noise, name + ": extra_noise");
    if ((extra_noise.array() < 0.0).any()) {
        throw std::invalid_argument(name + ": extra_noise must be >= 0");
    }
    if (duty_on < 1 || duty_off < 0) {
        throw std::invalid_argument(name + ": duty must be on >= 1, off >= 0");
    }
    const bool has_signal = (offset.array() != 0.0).any() ||
                            (extra_noise.array() > 0.0).any();
    if (!has_signal) {
        throw std::invalid_argument(
            name + ": perturb needs a nonzero offset or extra noise somewhere");
    }
}

bool PerturbSpec::active_at(long sample_index) const {
    if (duty_off == 0) return true;
    return sample_index % (duty_on + duty_off) < duty_on;
}

Trace generate(const std::optional<WorkloadSpec>& workload,
               const std::vector<PerturbSpec>& perturbs,
               const GenerateOptions& options) {
    if (options.n_samples < 1) {
        throw std::invalid_argument("generate: n_samples must be >= 1");
    }
    if (!workload && perturbs.empty()) {
        throw std::invalid_argument("generate: need a workload or a perturb");
    }
    if (workload) workload->validate();
    for (const auto& p : perturbs) p.validate();

    Trace trace;
    trace.source = "synth:seed=" + std::to_string(options.seed);
    if (workload) trace.label.workload = workload->name;
    for (const auto& p : perturbs) {
        if (p.kind == PerturbKind::attack) trace.label.attack = p.name;
        else trace.label.benign = p.name;
    }

    Rng rng(options.seed);
    trace.samples.reserve(static_cast<std::size_t>(options.n_samples));
    for (long t = 0; t < options.n_samples; ++t) {
        BehaviorSample s;
        s.t_ms = static_cast<double>(t) * options.interval_ms;
        s.counts = Eigen::VectorXd::Zero(kEventCount);
        if (workload) {
            for (int e = 0; e < kEventCount; ++e) {
                s.counts[e] += workload->deterministic_at(e, t) +
                               workload->noise_scale[e] * rng.normal();
            }
        }
        for (const auto& p : perturbs) {
            if (!p.active_at(t)) continue;
            for (int e = 0; e < kEventCount; ++e) {
                s.counts[e] += p.offset[e];
                if (p.extra_noise[e] > 0.0) {
                    s.counts[e] += p.extra_noise[e] * rng.normal();
                }
            }
        }
        s.counts = s.counts.cwiseMax(0.0);
        trace.samples.push_back(std::move(s));
    }
    return trace;
}

const WorkloadSpec* ScenarioCatalog::find_workload(const std::string& name) const {
    for (const auto& w : workloads) {
        if (w.name == name) return &w;
    }
    if (idle_background.name == name) return &idle_background;
    return nullptr;
}

const PerturbSpec* ScenarioCatalog::find_perturb(const std::string& name) const {
    for (const auto& p : benign) {
        if (p.name == name) return &p;
    }
    for (const auto& p : attacks) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

ScenarioCatalog builtin_scenarios() {
    ScenarioCatalog cat;

    auto workload = [&](std::string name, Eigen::VectorXd baseline,
                        std::vector<PeriodicTerm> periodic,
                        Eigen::VectorXd noise) {
        WorkloadSpec w;
        w.name = std::move(name);
        w.baseline = std::move(baseline);
        w.periodic = std::move(periodic);
        w.noise_scale = std::move(noise);
        w.validate();
        cat.workloads.push_back(std::move(w));
    };
    auto perturb = [&](std::string name, PerturbKind kind, Eigen::VectorXd offset,
                       Eigen::VectorXd extra) {
        PerturbSpec p;
        p.name = std::move(name);
        p.kind = kind;
        p.offset = std::move(offset);
        p.extra_noise = std::move(extra);
        p.validate();
        (kind == PerturbKind::attack ? cat.attacks : cat.benign)
            .push_back(std::move(p));
    };

    // Magnitudes are synthetic stand-ins at per-10ms-delta scale, not
    // measurements. Each workload gets its own rhythm; attacks press hardest
    // on cache-miss and branch events, benign programs on compute events.
    workload("ml_training",
             vec13({{I_INSTR, 2.2e7}, {I_STALL_I, 6.0e6}, {I_STALL_R, 5.0e6},
                    {I_CYCLES, 3.0e7}, {I_LOAD, 7.0e6}, {I_DTLB_R, 5.0e6},
                    {I_STORE, 3.5e6}, {I_BPU, 4.5e6}, {I_DTLB_W, 1.6e6},
                    {I_BRANCH, 4.2e6}, {I_L1D, 2.5e5}, {I_L1I, 6.0e4},
                    {I_CTX, 40.0}}),
             {{I_INSTR, 5.0e6, 100.0, 0.0},
              {I_LOAD, 1.8e6, 100.0, 0.7},
              {I_CYCLES, 6.0e6, 100.0, 0.3},
              {I_L1D, 6.0e4, 100.0, 1.1}},
             vec13({{I_INSTR, 3.0e5}, {I_STALL_I, 1.2e5}, {I_STALL_R, 1.0e5},
                    {I_CYCLES, 4.0e5}, {I_LOAD, 1.4e5}, {I_DTLB_R, 1.0e5},
                    {I_STORE, 8.0e4}, {I_BPU, 9.0e4}, {I_DTLB_W, 5.0e4},
                    {I_BRANCH, 8.0e4}, {I_L1D, 9.0e3}, {I_L1I, 3.0e3},
                    {I_CTX, 4.0}}));
    workload("database",
             vec13({{I_INSTR, 1.5e7}, {I_STALL_I, 7.0e6}, {I_STALL_R, 8.0e6},
                    {I_CYCLES, 2.8e7}, {I_LOAD, 6.5e6}, {I_DTLB_R, 5.5e6},
                    {I_STORE, 4.0e6}, {I_BPU, 3.8e6}, {I_DTLB_W, 2.2e6},
                    {I_BRANCH, 3.5e6}, {I_L1D, 4.0e5}, {I_L1I, 1.8e5},
                    {I_CTX, 120.0}}),
             {{I_LOAD, 1.5e6, 64.0, 0.0},
              {I_STORE, 8.0e5, 64.0, 1.3},
              {I_DTLB_R, 1.2e6, 64.0, 0.4},
              {I_CYCLES, 3.0e6, 640.0, 0.0}},
             vec13({{I_INSTR, 3.2e5}, {I_STALL_I, 1.6e5}, {I_STALL_R, 1.8e5},
                    {I_CYCLES, 5.5e5}, {I_LOAD, 1.5e5}, {I_DTLB_R, 1.2e5},
                    {I_STORE, 9.0e4}, {I_BPU, 8.0e4}, {I_DTLB_W, 6.0e4},
                    {I_BRANCH, 7.5e4}, {I_L1D, 1.2e4}, {I_L1I, 5.0e3},
                    {I_CTX, 8.0}}));
    workload("stream_server",
             vec13({{I_INSTR, 1.1e7}, {I_STALL_I, 5.0e6}, {I_STALL_R, 4.5e6},
                    {I_CYCLES, 2.2e7}, {I_LOAD, 4.5e6}, {I_DTLB_R, 3.5e6},
                    {I_STORE, 2.8e6}, {I_BPU, 3.0e6}, {I_DTLB_W, 1.4e6},
                    {I_BRANCH, 2.8e6}, {I_L1D, 3.0e5}, {I_L1I, 9.0e4},
                    {I_CTX, 250.0}}),
             {{I_INSTR, 3.0e6, 33.0, 0.0},
              {I_LOAD, 9.0e5, 33.0, 0.9},
              {I_BRANCH, 6.0e5, 33.0, 0.2},
              {I_CYCLES, 4.0e6, 33.0, 0.5}},
             vec13({{I_INSTR, 1.8e5}, {I_STALL_I, 9.0e4}, {I_STALL_R, 8.0e4},
                    {I_CYCLES, 3.3e5}, {I_LOAD, 7.0e4}, {I_DTLB_R, 5.5e4},
                    {I_STORE, 4.5e4}, {I_BPU, 5.0e4}, {I_DTLB_W, 2.5e4},
                    {I_BRANCH, 4.5e4}, {I_L1D, 6.0e3}, {I_L1I, 2.0e3},
                    {I_CTX, 10.0}}));
    workload("web_server",
             vec13({{I_INSTR, 9.0e6}, {I_STALL_I, 6.5e6}, {I_STALL_R, 5.5e6},
                    {I_CYCLES, 2.5e7}, {I_LOAD, 3.8e6}, {I_DTLB_R, 3.2e6},
                    {I_STORE, 2.2e6}, {I_BPU, 4.0e6}, {I_DTLB_W, 1.2e6},
                    {I_BRANCH, 4.5e6}, {I_L1D, 2.2e5}, {I_L1I, 2.6e5},
                    {I_CTX, 400.0}}),
             {{I_BPU, 9.0e5, 200.0, 0.0},
              {I_BRANCH, 1.0e6, 200.0, 0.3},
              {I_INSTR, 1.8e6, 200.0, 0.8},
              {I_L1I, 5.0e4, 50.0, 0.0}},
             vec13({{I_INSTR, 2.0e5}, {I_STALL_I, 1.4e5}, {I_STALL_R, 1.2e5},
                    {I_CYCLES, 5.0e5}, {I_LOAD, 8.0e4}, {I_DTLB_R, 6.5e4},
                    {I_STORE, 4.5e4}, {I_BPU, 9.0e4}, {I_DTLB_W, 2.5e4},
                    {I_BRANCH, 1.0e5}, {I_L1D, 5.0e3}, {I_L1I, 6.0e3},
                    {I_CTX, 16.0}}));
    workload("mapreduce",
             vec13({{I_INSTR, 1.8e7}, {I_STALL_I, 9.0e6}, {I_STALL_R, 7.5e6},
                    {I_CYCLES, 3.2e7}, {I_LOAD, 8.0e6}, {I_DTLB_R, 6.0e6},
                    {I_STORE, 5.0e6}, {I_BPU, 3.2e6}, {I_DTLB_W, 3.0e6},
                    {I_BRANCH, 3.0e6}, {I_L1D, 6.0e5}, {I_L1I, 2.2e5},
                    {I_CTX, 800.0}}),
             {{I_LOAD, 2.5e6, 400.0, 0.0},
              {I_STORE, 1.5e6, 400.0, 0.6},
              {I_DTLB_W, 8.0e5, 400.0, 1.0},
              {I_INSTR, 4.0e6, 400.0, 0.2}},
             vec13({{I_INSTR, 5.0e5}, {I_STALL_I, 2.7e5}, {I_STALL_R, 2.3e5},
                    {I_CYCLES, 8.0e5}, {I_LOAD, 2.4e5}, {I_DTLB_R, 1.8e5},
                    {I_STORE, 1.5e5}, {I_BPU, 9.5e4}, {I_DTLB_W, 9.0e4},
                    {I_BRANCH, 9.0e4}, {I_L1D, 1.8e4}, {I_L1I, 7.0e3},
                    {I_CTX, 40.0}}));

    cat.idle_background.name = "idle";
    cat.idle_background.baseline =
        vec13({{I_INSTR, 2.0e5}, {I_STALL_I, 8.0e4}, {I_STALL_R, 6.0e4},
               {I_CYCLES, 8.0e5}, {I_LOAD, 6.0e4}, {I_DTLB_R, 5.0e4},
               {I_STORE, 3.0e4}, {I_BPU, 4.0e4}, {I_DTLB_W, 1.5e4},
               {I_BRANCH, 4.0e4}, {I_L1D, 4.0e3}, {I_L1I, 2.5e3},
               {I_CTX, 15.0}});
    cat.idle_background.periodic = {{I_CYCLES, 5.0e4, 100.0, 0.0}};
    cat.idle_background.noise_scale =
        vec13({{I_INSTR, 1.6e4}, {I_STALL_I, 7.0e3}, {I_STALL_R, 5.0e3},
               {I_CYCLES, 6.0e4}, {I_LOAD, 5.0e3}, {I_DTLB_R, 4.0e3},
               {I_STORE, 2.5e3}, {I_BPU, 3.5e3}, {I_DTLB_W, 1.5e3},
               {I_BRANCH, 3.5e3}, {I_L1D, 4.0e2}, {I_L1I, 2.5e2},
               {I_CTX, 2.0}});
    cat.idle_background.validate();

    const auto benign = PerturbKind::benign;
    perturb("gpg_rsa", benign,
            vec13({{I_INSTR, 2.5e6}, {I_CYCLES, 2.8e6}, {I_STALL_R, 4.0e5},
                   {I_BPU, 3.0e5}, {I_BRANCH, 2.5e5}, {I_L1D, 1.5e3}}),
            vec13({{I_INSTR, 1.2e5}, {I_CYCLES, 1.5e5}}));
    perturb("gcc", benign,
            vec13({{I_INSTR, 1.8e6}, {I_LOAD, 7.0e5}, {I_DTLB_R, 5.0e5},
                   {I_L1I, 5.0e4}, {I_L1D, 2.5e4}, {I_STORE, 4.0e5},
                   {I_CYCLES, 2.0e6}, {I_CTX, 20.0}}),
            vec13({{I_INSTR, 1.5e5}, {I_L1I, 6.0e3}, {I_LOAD, 8.0e4}}));
    perturb("bzip2", benign,
            vec13({{I_LOAD, 9.0e5}, {I_STORE, 6.0e5}, {I_L1D, 6.0e4},
                   {I_INSTR, 1.2e6}, {I_CYCLES, 1.5e6}, {I_DTLB_R, 3.0e5}}),
            vec13({{I_LOAD, 1.0e5}, {I_L1D, 7.0e3}}));
    perturb("h264ref", benign,
            vec13({{I_INSTR, 2.2e6}, {I_LOAD, 8.0e5}, {I_STORE, 5.0e5},
                   {I_BRANCH, 5.0e5}, {I_BPU, 4.0e5}, {I_CYCLES, 2.4e6}}),
            vec13({{I_INSTR, 1.8e5}, {I_BRANCH, 5.0e4}}));
    perturb("mcf", benign,
            vec13({{I_DTLB_R, 9.0e5}, {I_L1D, 9.0e4}, {I_LOAD, 1.1e6},
                   {I_STALL_R, 9.0e5}, {I_CYCLES, 1.8e6}}),
            vec13({{I_DTLB_R, 1.1e5}, {I_L1D, 9.0e3}}));
    perturb("milc", benign,
            vec13({{I_LOAD, 1.3e6}, {I_STALL_R, 8.0e5}, {I_INSTR, 1.5e6},
                   {I_L1D, 5.0e4}, {I_DTLB_W, 3.0e5}}),
            vec13({{I_LOAD, 1.2e5}, {I_STALL_R, 9.0e4}}));
    perturb("namd", benign,
            vec13({{I_INSTR, 2.8e6}, {I_CYCLES, 3.0e6}, {I_LOAD, 6.0e5},
                   {I_STALL_I, 5.0e5}}),
            vec13({{I_INSTR, 2.0e5}, {I_CYCLES, 2.0e5}}));
    perturb("libquantum", benign,
            vec13({{I_LOAD, 1.5e6}, {I_STALL_I, 9.0e5}, {I_L1D, 7.0e4},
                   {I_INSTR, 1.4e6}}),
            vec13({{I_LOAD, 1.4e5}, {I_STALL_I, 1.0e5}}));
    perturb("soplex", benign,
            vec13({{I_L1D, 8.0e4}, {I_DTLB_R, 7.0e5}, {I_LOAD, 1.0e6},
                   {I_STALL_R, 6.0e5}}),
            vec13({{I_L1D, 8.0e3}, {I_DTLB_R, 9.0e4}}));
    perturb("hmmer", benign,
            vec13({{I_BRANCH, 8.0e5}, {I_BPU, 7.0e5}, {I_INSTR, 2.0e6},
                   {I_LOAD, 5.0e5}}),
            vec13({{I_BRANCH, 7.0e4}, {I_BPU, 6.0e4}}));
    perturb("gobmk", benign,
            vec13({{I_BRANCH, 9.0e5}, {I_BPU, 8.0e5}, {I_L1I, 6.0e4},
                   {I_INSTR, 1.6e6}, {I_CTX, 30.0}}),
            vec13({{I_BRANCH, 8.0e4}, {I_L1I, 5.0e3}}));

    const auto attack = PerturbKind::attack;
    perturb("l1pp", attack,
            vec13({{I_L1D, 1.2e6}, {I_LOAD, 2.5e6}, {I_CYCLES, 3.0e6},
                   {I_INSTR, 1.5e6}, {I_DTLB_R, 6.0e5}}),
            vec13({{I_L1D, 1.5e5}, {I_LOAD, 2.5e5}, {I_CYCLES, 3.0e5}}));
    perturb("l3pp", attack,
            vec13({{I_L1D, 2.2e6}, {I_STALL_R, 2.5e6}, {I_DTLB_R, 1.2e6},
                   {I_LOAD, 3.0e6}, {I_CYCLES, 4.0e6}}),
            vec13({{I_L1D, 2.5e5}, {I_STALL_R, 3.0e5}, {I_LOAD, 3.0e5}}));
    perturb("fr", attack,
            vec13({{I_L1D, 1.6e6}, {I_INSTR, 8.0e5}, {I_CYCLES, 2.0e6},
                   {I_LOAD, 1.8e6}, {I_STALL_R, 1.2e6}}),
            vec13({{I_L1D, 2.0e5}, {I_CYCLES, 2.5e5}}));
    perturb("ff", attack,
            vec13({{I_L1D, 9.0e5}, {I_STALL_I, 2.8e6}, {I_INSTR, 1.2e6},
                   {I_CYCLES, 3.5e6}}),
            vec13({{I_STALL_I, 3.0e5}, {I_L1D, 1.2e5}, {I_CYCLES, 3.0e5}}));
    perturb("spectre_v1", attack,
            vec13({{I_BRANCH, 3.0e6}, {I_BPU, 2.6e6}, {I_L1D, 8.0e5},
                   {I_INSTR, 2.0e6}, {I_LOAD, 1.5e6}}),
            vec13({{I_BRANCH, 3.0e5}, {I_BPU, 2.5e5}, {I_L1D, 1.0e5}}));
    perturb("spectre_v2", attack,
            vec13({{I_BPU, 4.0e6}, {I_BRANCH, 3.5e6}, {I_L1I, 4.0e5},
                   {I_INSTR, 1.8e6}}),
            vec13({{I_BPU, 4.0e5}, {I_BRANCH, 3.5e5}, {I_L1I, 5.0e4}}));
    perturb("spectre_v3", attack,
            vec13({{I_STALL_R, 6.0e6}, {I_L1D, 3.0e6}, {I_CYCLES, 8.0e6},
                   {I_INSTR, 3.0e6}, {I_CTX, 150.0}, {I_DTLB_R, 2.0e6}}),
            vec13({{I_STALL_R, 6.0e5}, {I_L1D, 3.5e5}, {I_CYCLES, 8.0e5}}));
    perturb("spectre_v4", attack,
            vec13({{I_STORE, 2.5e6}, {I_STALL_I, 2.2e6}, {I_L1D, 1.0e6},
                   {I_LOAD, 1.2e6}}),
            vec13({{I_STORE, 2.5e5}, {I_STALL_I, 2.5e5}, {I_L1D, 1.2e5}}));
    perturb("buffer_overflow", attack,
            vec13({{I_INSTR, 2.5e6}, {I_BRANCH, 1.5e6}, {I_L1I, 5.0e5},
                   {I_CTX, 250.0}, {I_STALL_I, 1.5e6}}),
            vec13({{I_INSTR, 3.0e5}, {I_L1I, 6.0e4}, {I_CTX, 25.0}}));

    return cat;
}

namespace {

void write_workload(std::ostream& os, const WorkloadSpec& w, const char* section) {
    os << '[' << section;
    if (section != std::string("idle")) os << ' ' << w.name;
    os << "]\n";
    os << "baseline=";
    textio::write_vector(os, w.baseline);
    os << "noise=";
    textio::write_vector(os, w.noise_scale);
    for (const auto& t : w.periodic) {
        os << "sin=" << t.event << ' ' << textio::format_double(t.amplitude)
           << ' ' << textio::format_double(t.period) << ' '
           << textio::format_double(t.phase) << '\n';
    }
}

void write_perturb(std::ostream& os, const PerturbSpec& p) {
    os << '[' << (p.kind == PerturbKind::attack ? "attack" : "benign") << ' '
       << p.name << "]\n";
    os << "offset=";
    textio::write_vector(os, p.offset);
    os << "extra_noise=";
    textio::write_vector(os, p.extra_noise);
    os << "duty=" << p.duty_on << ' ' << p.duty_off << '\n';
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

Eigen::VectorXd parse_vec13(const std::string& s, const std::string& ctx) {
    const auto toks = split_ws(s);
    if (toks.size() != static_cast<std::size_t>(kEventCount)) {
        throw FormatError(ctx + ": expected " + std::to_string(kEventCount) +
                          " values");
    }
    Eigen::VectorXd v(kEventCount);
    for (int i = 0; i < kEventCount; ++i) {
        v[i] = textio::parse_double(toks[static_cast<std::size_t>(i)], ctx);
    }
    return v;
}

}  // namespace

void save_catalog(const ScenarioCatalog& catalog, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "# scenario catalog\n";
    for (const auto& w : catalog.workloads) write_workload(out, w, "workload");
    write_workload(out, catalog.idle_background, "idle");
    for (const auto& p : catalog.benign) write_perturb(out, p);
    for (const auto& p : catalog.attacks) write_perturb(out, p);
}

ScenarioCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");

    ScenarioCatalog cat;
    WorkloadSpec* cur_workload = nullptr;
    PerturbSpec* cur_perturb = nullptr;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string ctx = path + ":" + std::to_string(lineno);

        if (line.front() == '[') {
            if (line.back() != ']') throw FormatError(ctx + ": unterminated section");
            const auto toks = split_ws(line.substr(1, line.size() - 2));
            if (toks.empty()) throw FormatError(ctx + ": empty section header");
            cur_workload = nullptr;
            cur_perturb = nullptr;
            if (toks[0] == "workload" && toks.size() == 2) {
                cat.workloads.push_back(WorkloadSpec{});
                cur_workload = &cat.workloads.back();
                cur_workload->name = toks[1];
            } else if (toks[0] == "idle" && toks.size() == 1) {
                cur_workload = &cat.idle_background;
                cur_workload->name = "idle";
            } else if ((toks[0] == "benign" || toks[0] == "attack") &&
                       toks.size() == 2) {
                PerturbSpec p;
                p.name = toks[1];
                p.kind = toks[0] == "attack" ? PerturbKind::attack
                                             : PerturbKind::benign;
                p.offset = Eigen::VectorXd::Zero(kEventCount);
                p.extra_noise = Eigen::VectorXd::Zero(kEventCount);
                auto& dst = p.kind == PerturbKind::attack ? cat.attacks : cat.benign;
                dst.push_back(std::move(p));
                cur_perturb = &dst.back();
            } else {
                throw FormatError(ctx + ": unknown section '" + line + "'");
            }
            if (cur_workload) {
                cur_workload->baseline = Eigen::VectorXd::Zero(kEventCount);
                cur_workload->noise_scale = Eigen::VectorXd::Zero(kEventCount);
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw FormatError(ctx + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        if (cur_workload) {
            if (key == "baseline") cur_workload->baseline = parse_vec13(value, ctx);
            else if (key == "noise") cur_workload->noise_scale = parse_vec13(value, ctx);
            else if (key == "sin") {
                const auto toks = split_ws(value);
                if (toks.size() != 4) throw FormatError(ctx + ": sin needs 4 fields");
                PeriodicTerm t;
                t.event = static_cast<int>(textio::parse_long(toks[0], ctx));
                t.amplitude = textio::parse_double(toks[1], ctx);
                t.period = textio::parse_double(toks[2], ctx);
                t.phase = textio::parse_double(toks[3], ctx);
                cur_workload->periodic.push_back(t);
            } else {
                throw FormatError(ctx + ": unknown workload key '" + key + "'");
            }
        } else if (cur_perturb) {
            if (key == "offset") cur_perturb->offset = parse_vec13(value, ctx);
            else if (key == "extra_noise") cur_perturb->extra_noise = parse_vec13(value, ctx);
            else if (key == "duty") {
                const auto toks = split_ws(value);
                if (toks.size() != 2) throw FormatError(ctx + ": duty needs 2 fields");
                cur_perturb->duty_on = textio::parse_long(toks[0], ctx);
                cur_perturb->duty_off = textio::parse_long(toks[1], ctx);
            } else {
                throw FormatError(ctx + ": unknown perturb key '" + key + "'");
            }
        } else {
            throw FormatError(ctx + ": key outside a section");
        }
    }

    for (const auto& w : cat.workloads) w.validate();
    for (const auto& p : cat.benign) p.validate();
    for (const auto& p : cat.attacks) p.validate();
    if (!cat.idle_background.name.empty()) cat.idle_background.validate();
    return cat;
}

}  // namespace redwatch
