#include "redwatch/lstm.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/rng.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return ((-x.array()).exp() + 1.0).inverse().matrix();
}

struct StepCache {
    Eigen::MatrixXd z;       // (d+h) x B
    Eigen::MatrixXd gate_i;  // h x B
    Eigen::MatrixXd gate_f;
    Eigen::MatrixXd gate_o;
    Eigen::MatrixXd gate_g;
    Eigen::MatrixXd c_prev;
    Eigen::MatrixXd tanh_c;
};

struct ForwardCache {
    std::vector<StepCache> steps;
    Eigen::MatrixXd h_last;  // h x B
    Eigen::MatrixXd y;       // d x B
};

ForwardCache forward_cached(const PredictorModel& m,
                            const std::vector<Eigen::MatrixXd>& steps) {
    const int h = m.hidden_dim;
    const Eigen::Index batch = steps.front().cols();
    ForwardCache cache;
    cache.steps.resize(steps.size());

    Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, batch);
    Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(h, batch);
    for (std::size_t t = 0; t < steps.size(); ++t) {
        StepCache& sc = cache.steps[t];
        sc.z.resize(m.input_dim + h, batch);
        sc.z.topRows(m.input_dim) = steps[t];
        sc.z.bottomRows(h) = hidden;

        Eigen::MatrixXd a = m.w_gate * sc.z;
        a.colwise() += m.b_gate;
        sc.gate_i = sigmoid(a.topRows(h));
        sc.gate_f = sigmoid(a.middleRows(h, h));
        sc.gate_o = sigmoid(a.middleRows(2 * h, h));
        sc.gate_g = a.bottomRows(h).array().tanh().matrix();

        sc.c_prev = cell;
        cell = sc.gate_f.cwiseProduct(cell) + sc.gate_i.cwiseProduct(sc.gate_g);
        sc.tanh_c = cell.array().tanh().matrix();
        hidden = sc.gate_o.cwiseProduct(sc.tanh_c);
    }
    cache.h_last = hidden;
    cache.y = m.w_out * hidden;
    cache.y.colwise() += m.b_out;
    return cache;
}

struct Gradients {
    Eigen::MatrixXd w_gate;
    Eigen::VectorXd b_gate;
    Eigen::MatrixXd w_out;
    Eigen::VectorXd b_out;

    double squared_norm() const {
        return w_gate.squaredNorm() + b_gate.squaredNorm() +
               w_out.squaredNorm() + b_out.squaredNorm();
    }
    void scale(double s) {
        w_gate *= s;
        b_gate *= s;
        w_out *= s;
        b_out *= s;
    }
};

double mse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& targets) {
    return (y - targets).squaredNorm() /
           static_cast<double>(y.rows() * y.cols());
}

// Backprop through time for the mean-per-element squared error.
Gradients backward(const PredictorModel& m, const ForwardCache& cache,
                   const Eigen::MatrixXd& targets) {
    const int h = m.hidden_dim;
    const Eigen::Index batch = targets.cols();
    const double scale = 2.0 / static_cast<double>(targets.rows() * batch);

    Gradients g;
    g.w_gate = Eigen::MatrixXd::Zero(m.w_gate.rows(), m.w_gate.cols());
    g.b_gate = Eigen::VectorXd::Zero(m.b_gate.size());
    g.w_out = Eigen::MatrixXd::Zero(m.w_out.rows(), m.w_out.cols());
    g.b_out = Eigen::VectorXd::Zero(m.b_out.size());

    const Eigen::MatrixXd dy = scale * (cache.y - targets);
    g.w_out = dy * cache.h_last.transpose();
    g.b_out = dy.rowwise().sum();

    Eigen::MatrixXd dh = m.w_out.transpose() * dy;
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(h, batch);
    Eigen::MatrixXd da(4 * h, batch);
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
        const StepCache& sc = cache.steps[t];
        const Eigen::MatrixXd d_o = dh.cwiseProduct(sc.tanh_c);
        dc.array() +=
            dh.array() * sc.gate_o.array() * (1.0 - sc.tanh_c.array().square());
        const Eigen::MatrixXd d_i = dc.cwiseProduct(sc.gate_g);
        const Eigen::MatrixXd d_g = dc.cwiseProduct(sc.gate_i);
        const Eigen::MatrixXd d_f = dc.cwiseProduct(sc.c_prev);

        da.topRows(h) =
            (d_i.array() * sc.gate_i.array() * (1.0 - sc.gate_i.array())).matrix();
        da.middleRows(h, h) =
            (d_f.array() * sc.gate_f.array() * (1.0 - sc.gate_f.array())).matrix();
        da.middleRows(2 * h, h) =
            (d_o.array() * sc.gate_o.array() * (1.0 - sc.gate_o.array())).matrix();
        da.bottomRows(h) =
            (d_g.array() * (1.0 - sc.gate_g.array().square())).matrix();

        g.w_gate.noalias() += da * sc.z.transpose();
        g.b_gate += da.rowwise().sum();

        dh.noalias() = m.w_gate.transpose().bottomRows(h) * da;
        dc = dc.cwiseProduct(sc.gate_f);
    }
    return g;
}

struct ParamView {
    double* data;
    Eigen::Index size;
};

std::vector<ParamView> param_views(PredictorModel& m) {
    return {{m.w_gate.data(), m.w_gate.size()},
            {m.b_gate.data(), m.b_gate.size()},
            {m.w_out.data(), m.w_out.size()},
            {m.b_out.data(), m.b_out.size()}};
}

std::vector<ParamView> grad_views(Gradients& g) {
    return {{g.w_gate.data(), g.w_gate.size()},
            {g.b_gate.data(), g.b_gate.size()},
            {g.w_out.data(), g.w_out.size()},
            {g.b_out.data(), g.b_out.size()}};
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0 || lr_decay <= 0 || decay_every <= 0 || epochs <= 0 ||
        batch_size <= 0 || history_len <= 0 || hidden_dim <= 0 || clip_norm <= 0) {
        throw std::invalid_argument("train config fields must be positive");
    }
}

Eigen::MatrixXd PredictorModel::forward(
    const std::vector<Eigen::MatrixXd>& steps) const {
    const int h = hidden_dim;
    const Eigen::Index batch = steps.front().cols();
    Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, batch);
    Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(h, batch);
    Eigen::MatrixXd z(input_dim + h, batch);
    for (const auto& x : steps) {
        z.topRows(input_dim) = x;
        z.bottomRows(h) = hidden;
        Eigen::MatrixXd a = w_gate * z;
        a.colwise() += b_gate;
        cell = sigmoid(a.middleRows(h, h)).cwiseProduct(cell) +
               sigmoid(a.topRows(h))
                   .cwiseProduct(a.bottomRows(h).array().tanh().matrix());
        hidden = sigmoid(a.middleRows(2 * h, h))
                     .cwiseProduct(cell.array().tanh().matrix());
    }
    Eigen::MatrixXd y = w_out * hidden;
    y.colwise() += b_out;
    return y;
}

PredictorModel init_model(int input_dim, const TrainConfig& cfg,
                          const Eigen::VectorXd& mu,
                          const Eigen::VectorXd& sigma) {
    cfg.validate();
    if (mu.size() != input_dim || sigma.size() != input_dim) {
        throw std::invalid_argument("normalization stats must match input_dim");
    }
    PredictorModel m;
    m.input_dim = input_dim;
    m.hidden_dim = cfg.hidden_dim;
    m.history_len = cfg.history_len;
    m.config = cfg;
    m.mu = mu;
    m.sigma = sigma.cwiseMax(1e-8);

    const int h = cfg.hidden_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(h));
    Rng rng(cfg.seed);
    auto fill = [&](double* data, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-scale, scale);
    };
    m.w_gate.resize(4 * h, input_dim + h);
    m.b_gate.resize(4 * h);
    m.w_out.resize(input_dim, h);
    m.b_out.resize(input_dim);
    fill(m.w_gate.data(), m.w_gate.size());
    fill(m.b_gate.data(), m.b_gate.size());
    fill(m.w_out.data(), m.w_out.size());
    fill(m.b_out.data(), m.b_out.size());
    m.b_gate.segment(h, h).array() += 1.0;  // open the forget gate at start
    return m;
}

GradCheckBatch make_batch(const PredictorModel& model, const Trace& trace,
                          const std::vector<int>& starts) {
    if (starts.empty()) throw std::invalid_argument("batch must be non-empty");
    const int L = model.history_len;
    const Eigen::Index batch = static_cast<Eigen::Index>(starts.size());
    Eigen::MatrixXd norm(model.input_dim, trace.size());
    for (int i = 0; i < trace.size(); ++i) {
        norm.col(i) = model.normalize(trace.samples[static_cast<std::size_t>(i)].counts);
    }
    GradCheckBatch out;
    out.steps.assign(static_cast<std::size_t>(L),
                     Eigen::MatrixXd(model.input_dim, batch));
    out.targets.resize(model.input_dim, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const int s = starts[static_cast<std::size_t>(b)];
        if (s < 0 || s + L >= trace.size()) {
            throw std::invalid_argument("window start out of range");
        }
        for (int t = 0; t < L; ++t) {
            out.steps[static_cast<std::size_t>(t)].col(b) = norm.col(s + t);
        }
        out.targets.col(b) = norm.col(s + L);
    }
    return out;
}

TrainResult train(const std::vector<Trace>& traces, const TrainConfig& cfg) {
    cfg.validate();
    if (traces.empty()) throw std::invalid_argument("no training traces");
    const int L = cfg.history_len;

    long total = 0;
    for (const auto& t : traces) total += t.size();
    if (total == 0) throw std::invalid_argument("empty training traces");

    const int d = kEventCount;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (const auto& t : traces) {
        for (const auto& s : t.samples) mu += s.counts;
    }
    mu /= static_cast<double>(total);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const auto& t : traces) {
        for (const auto& s : t.samples) {
            var += (s.counts - mu).cwiseAbs2();
        }
    }
    var /= static_cast<double>(total);

    PredictorModel model = init_model(d, cfg, mu, var.cwiseSqrt());

    // Normalized per-trace matrices and the pooled window index.
    std::vector<Eigen::MatrixXd> norm;
    std::vector<std::pair<int, int>> windows;  // (trace, start)
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const Trace& t = traces[i];
        if (t.size() <= L) {
            std::cerr << "warning: trace '" << t.source << "' has " << t.size()
                      << " samples, needs > " << L << "; skipped\n";
            continue;
        }
        Eigen::MatrixXd m(d, t.size());
        for (int c = 0; c < t.size(); ++c) {
            m.col(c) = model.normalize(t.samples[static_cast<std::size_t>(c)].counts);
        }
        const int idx = static_cast<int>(norm.size());
        norm.push_back(std::move(m));
        for (int s = 0; s + L < t.size(); ++s) windows.emplace_back(idx, s);
    }
    if (windows.empty()) {
        throw std::invalid_argument("all traces shorter than history_len+1");
    }

    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    TrainResult result;
    std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(L));
    Eigen::MatrixXd targets;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.learning_rate * std::pow(cfg.lr_decay, epoch / cfg.decay_every);
        shuffle_rng.shuffle(windows);

        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < windows.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(
                windows.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            const Eigen::Index bsz = static_cast<Eigen::Index>(end - begin);
            for (auto& m : steps) m.resize(d, bsz);
            targets.resize(d, bsz);
            for (Eigen::Index b = 0; b < bsz; ++b) {
                const auto [ti, s] = windows[begin + static_cast<std::size_t>(b)];
                for (int t = 0; t < L; ++t) {
                    steps[static_cast<std::size_t>(t)].col(b) = norm[static_cast<std::size_t>(ti)].col(s + t);
                }
                targets.col(b) = norm[static_cast<std::size_t>(ti)].col(s + L);
            }

            const ForwardCache cache = forward_cached(model, steps);
            const double loss = mse(cache.y, targets);
            if (!std::isfinite(loss)) {
                throw NumericError("training diverged at epoch " +
                                   std::to_string(epoch + 1));
            }
            loss_sum += loss * static_cast<double>(bsz);

            Gradients grads = backward(model, cache, targets);
            const double gnorm = std::sqrt(grads.squared_norm());
            if (!std::isfinite(gnorm)) {
                throw NumericError("training diverged at epoch " +
                                   std::to_string(epoch + 1));
            }
            if (gnorm > cfg.clip_norm) grads.scale(cfg.clip_norm / gnorm);

            model.w_gate -= lr * grads.w_gate;
            model.b_gate -= lr * grads.b_gate;
            model.w_out -= lr * grads.w_out;
            model.b_out -= lr * grads.b_out;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(windows.size()));
    }
    result.model = std::move(model);
    return result;
}

Eigen::VectorXd predict_next(const PredictorModel& model,
                             std::span<const BehaviorSample> history) {
    if (static_cast<int>(history.size()) != model.history_len) {
        throw FormatError("history must have exactly " +
                          std::to_string(model.history_len) + " samples");
    }
    std::vector<Eigen::MatrixXd> steps;
    steps.reserve(history.size());
    for (const auto& s : history) {
        if (s.counts.size() != model.input_dim) {
            throw FormatError("sample dimension does not match the model");
        }
        steps.push_back(model.normalize(s.counts));
    }
    return model.denormalize(model.forward(steps).col(0));
}

double grad_check(const PredictorModel& model, const GradCheckBatch& batch,
                  int count, std::uint64_t seed) {
    if (count <= 0) throw std::invalid_argument("grad_check: count must be > 0");
    if (batch.steps.empty() || batch.targets.cols() == 0) {
        throw std::invalid_argument("grad_check: batch must be non-empty");
    }

    PredictorModel probe = model;  // mutated in place, restored after each poke
    const ForwardCache cache = forward_cached(probe, batch.steps);
    Gradients grads = backward(probe, cache, batch.targets);

    auto params = param_views(probe);
    auto gviews = grad_views(grads);
    Eigen::Index total = 0;
    for (const auto& p : params) total += p.size;

    std::vector<Eigen::Index> indices(static_cast<std::size_t>(total));
    std::iota(indices.begin(), indices.end(), Eigen::Index{0});
    Rng rng(seed);
    rng.shuffle(indices);
    const std::size_t picks =
        std::min<std::size_t>(static_cast<std::size_t>(count), indices.size());

    constexpr double kStep = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < picks; ++k) {
        Eigen::Index idx = indices[k];
        double* slot = nullptr;
        double analytic = 0.0;
        for (std::size_t v = 0; v < params.size(); ++v) {
            if (idx < params[v].size) {
                slot = params[v].data + idx;
                analytic = gviews[v].data[idx];
                break;
            }
            idx -= params[v].size;
        }
        const double saved = *slot;
        *slot = saved + kStep;
        const double up = mse(probe.forward(batch.steps), batch.targets);
        *slot = saved - kStep;
        const double down = mse(probe.forward(batch.steps), batch.targets);
        *slot = saved;
        const double fd = (up - down) / (2.0 * kStep);
        const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
        worst = std::max(worst, std::abs(fd - analytic) / denom);
    }
    return worst;
}

void save_model(const PredictorModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "redwatch-model v1\n";
    out << "input_dim " << model.input_dim << '\n';
    out << "hidden_dim " << model.hidden_dim << '\n';
    out << "history_len " << model.history_len << '\n';
    const TrainConfig& c = model.config;
    out << "learning_rate " << textio::format_double(c.learning_rate) << '\n';
    out << "lr_decay " << textio::format_double(c.lr_decay) << '\n';
    out << "decay_every " << c.decay_every << '\n';
    out << "epochs " << c.epochs << '\n';
    out << "batch_size " << c.batch_size << '\n';
    out << "clip_norm " << textio::format_double(c.clip_norm) << '\n';
    out << "seed " << c.seed << '\n';
    out << "mu\n";
    textio::write_vector(out, model.mu);
    out << "sigma\n";
    textio::write_vector(out, model.sigma);
    out << "w_gate\n";
    textio::write_matrix_rows(out, model.w_gate);
    out << "b_gate\n";
    textio::write_vector(out, model.b_gate);
    out << "w_out\n";
    textio::write_matrix_rows(out, model.w_out);
    out << "b_out\n";
    textio::write_vector(out, model.b_out);
    out << "end\n";
    if (!out) throw FormatError("write failed for '" + path + "'");
}

namespace {

std::string expect_line(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": truncated model file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::string expect_keyword(std::istream& in, const std::string& path,
                           const std::string& key) {
    const std::string line = expect_line(in, path);
    if (line.rfind(key, 0) != 0) {
        throw FormatError(path + ": expected '" + key + "', got '" + line + "'");
    }
    std::string rest = line.substr(key.size());
    if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
    return rest;
}

Eigen::VectorXd read_vector(std::istream& in, const std::string& path,
                            Eigen::Index n) {
    const std::string line = expect_line(in, path);
    std::istringstream iss(line);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::string tok;
        if (!(iss >> tok)) throw FormatError(path + ": short vector line");
        v[i] = textio::parse_double(tok, path);
    }
    std::string extra;
    if (iss >> extra) throw FormatError(path + ": trailing vector data");
    return v;
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& path,
                            Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        m.row(r) = read_vector(in, path, cols).transpose();
    }
    return m;
}

}  // namespace

PredictorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    if (expect_line(in, path) != "redwatch-model v1") {
        throw FormatError(path + ": not a redwatch model file");
    }
    PredictorModel m;
    m.input_dim = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "input_dim"), path));
    m.hidden_dim = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "hidden_dim"), path));
    m.history_len = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "history_len"), path));
    if (m.input_dim <= 0 || m.hidden_dim <= 0 || m.history_len <= 0) {
        throw FormatError(path + ": non-positive model dimensions");
    }
    TrainConfig c;
    c.learning_rate =
        textio::parse_double(expect_keyword(in, path, "learning_rate"), path);
    c.lr_decay = textio::parse_double(expect_keyword(in, path, "lr_decay"), path);
    c.decay_every = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "decay_every"), path));
    c.epochs = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "epochs"), path));
    c.batch_size = static_cast<int>(
        textio::parse_long(expect_keyword(in, path, "batch_size"), path));
    c.clip_norm =
        textio::parse_double(expect_keyword(in, path, "clip_norm"), path);
    c.seed = static_cast<std::uint64_t>(
        textio::parse_long(expect_keyword(in, path, "seed"), path));
    c.history_len = m.history_len;
    c.hidden_dim = m.hidden_dim;
    m.config = c;

    const int d = m.input_dim;
    const int h = m.hidden_dim;
    expect_keyword(in, path, "mu");
    m.mu = read_vector(in, path, d);
    expect_keyword(in, path, "sigma");
    m.sigma = read_vector(in, path, d);
    expect_keyword(in, path, "w_gate");
    m.w_gate = read_matrix(in, path, 4 * h, d + h);
    expect_keyword(in, path, "b_gate");
    m.b_gate = read_vector(in, path, 4 * h);
    expect_keyword(in, path, "w_out");
    m.w_out = read_matrix(in, path, d, h);
    expect_keyword(in, path, "b_out");
    m.b_out = read_vector(in, path, d);
    expect_keyword(in, path, "end");

    if ((m.sigma.array() <= 0.0).any()) {
        throw FormatError(path + ": sigma must be positive");
    }
    if (!m.w_gate.allFinite() || !m.b_gate.allFinite() || !m.w_out.allFinite() ||
        !m.b_out.allFinite() || !m.mu.allFinite() || !m.sigma.allFinite()) {
        throw FormatError(path + ": non-finite model parameters");
    }
    return m;
}

}  // namespace redwatch
