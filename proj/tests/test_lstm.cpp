#include <doctest.h>

#include <cmath>

#include "redwatch/error.hpp"
#include "redwatch/lstm.hpp"
#include "redwatch/rng.hpp"
#include "redwatch/synth.hpp"
#include "test_util.hpp"

using namespace redwatch;

namespace {

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.hidden_dim = 8;
    cfg.history_len = 4;
    cfg.epochs = 5;
    cfg.seed = 11;
    return cfg;
}

Trace sinusoid_trace(int n) {
    WorkloadSpec w;
    w.name = "sine";
    w.baseline = Eigen::VectorXd::Constant(kEventCount, 1000.0);
    w.periodic.clear();
    for (int e = 0; e < kEventCount; ++e) {
        w.periodic.push_back({e, 200.0, 40.0, 0.37 * e});
    }
    w.noise_scale = Eigen::VectorXd::Constant(kEventCount, 1e-300);
    return generate(w, {}, {.n_samples = n, .seed = 21});
}

// One LSTM step written out gate by gate, scalar-wise, as an oracle.
void naive_step(const PredictorModel& m, const Eigen::VectorXd& x,
                Eigen::VectorXd& h, Eigen::VectorXd& c) {
    const int d = m.input_dim, hd = m.hidden_dim;
    Eigen::VectorXd z(d + hd);
    z << x, h;
    auto gate = [&](int block, int row) {
        double a = m.b_gate[block * hd + row];
        for (int k = 0; k < d + hd; ++k) a += m.w_gate(block * hd + row, k) * z[k];
        return a;
    };
    Eigen::VectorXd c_next(hd), h_next(hd);
    for (int r = 0; r < hd; ++r) {
        const double i = 1.0 / (1.0 + std::exp(-gate(0, r)));
        const double f = 1.0 / (1.0 + std::exp(-gate(1, r)));
        const double o = 1.0 / (1.0 + std::exp(-gate(2, r)));
        const double g = std::tanh(gate(3, r));
        c_next[r] = f * c[r] + i * g;
        h_next[r] = o * std::tanh(c_next[r]);
    }
    h = h_next;
    c = c_next;
}

}  // namespace

TEST_CASE("constant traces train to near-zero loss and a fixed-point predict") {
    const Trace trace = testutil::constant_trace(400, 250.0);
    TrainConfig cfg = small_config();
    cfg.epochs = 30;
    const TrainResult result = train({trace}, cfg);
    CHECK(result.epoch_loss.back() <= 1e-6);
    CHECK(result.epoch_loss.back() <= result.epoch_loss.front());

    const std::span<const BehaviorSample> history(
        trace.samples.data(), static_cast<std::size_t>(cfg.history_len));
    const Eigen::VectorXd predicted = predict_next(result.model, history);
    for (int e = 0; e < kEventCount; ++e) {
        CHECK(predicted[e] == doctest::Approx(250.0).epsilon(1e-3));
    }
}

TEST_CASE("a clean sinusoid is learnable to 0.05 normalized MSE") {
    const Trace trace = sinusoid_trace(2000);
    TrainConfig cfg;  // defaults
    cfg.seed = 5;
    const TrainResult result = train({trace}, cfg);
    CHECK(result.epoch_loss.back() <= 0.05);
    CHECK(result.epoch_loss.back() <= result.epoch_loss.front());
}

TEST_CASE("training is bit-deterministic in the seed") {
    const Trace trace = sinusoid_trace(300);
    const TrainConfig cfg = small_config();
    const TrainResult a = train({trace}, cfg);
    const TrainResult b = train({trace}, cfg);
    CHECK(a.model.w_gate == b.model.w_gate);
    CHECK(a.model.b_gate == b.model.b_gate);
    CHECK(a.model.w_out == b.model.w_out);
    CHECK(a.model.b_out == b.model.b_out);
}

TEST_CASE("zero model maps any history to the readout bias, de-normalized") {
    TrainConfig cfg = small_config();
    PredictorModel m = init_model(kEventCount, cfg,
                                  Eigen::VectorXd::Constant(kEventCount, 5.0),
                                  Eigen::VectorXd::Constant(kEventCount, 2.0));
    m.w_gate.setZero();
    m.b_gate.setZero();
    m.w_out.setZero();
    m.b_out = Eigen::VectorXd::LinSpaced(kEventCount, -1.0, 1.0);

    const Trace zeros = testutil::constant_trace(cfg.history_len, 0.0);
    const Eigen::VectorXd predicted = predict_next(
        m, std::span<const BehaviorSample>(zeros.samples.data(),
                                           zeros.samples.size()));
    const Eigen::VectorXd expected = m.denormalize(m.b_out);
    CHECK((predicted - expected).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("batched forward agrees with a naive per-step recurrence") {
    TrainConfig cfg = small_config();
    const PredictorModel m =
        init_model(kEventCount, cfg, Eigen::VectorXd::Zero(kEventCount),
                   Eigen::VectorXd::Ones(kEventCount));

    Rng rng(99);
    std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(cfg.history_len));
    for (auto& s : steps) {
        s.resize(kEventCount, 1);
        for (int e = 0; e < kEventCount; ++e) s(e, 0) = rng.normal();
    }
    const Eigen::VectorXd fast = m.forward(steps).col(0);

    Eigen::VectorXd h = Eigen::VectorXd::Zero(m.hidden_dim);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m.hidden_dim);
    for (const auto& s : steps) naive_step(m, s.col(0), h, c);
    const Eigen::VectorXd slow = m.w_out * h + m.b_out;
    CHECK((fast - slow).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("analytic gradients match central differences") {
    const Trace trace = sinusoid_trace(200);
    TrainConfig cfg = small_config();

    PredictorModel fresh =
        init_model(kEventCount, cfg, Eigen::VectorXd::Constant(kEventCount, 1000.0),
                   Eigen::VectorXd::Constant(kEventCount, 140.0));
    std::vector<int> starts;
    for (int s = 0; s < 24; ++s) starts.push_back(s * 7);
    const GradCheckBatch batch = make_batch(fresh, trace, starts);
    CHECK(grad_check(fresh, batch, 100, 1) < 1e-4);

    cfg.epochs = 1;
    const TrainResult result = train({trace}, cfg);
    const GradCheckBatch batch2 = make_batch(result.model, trace, starts);
    CHECK(grad_check(result.model, batch2, 100, 2) < 1e-4);

    CHECK_THROWS_AS(grad_check(fresh, batch, 0, 1), std::invalid_argument);
}

TEST_CASE("normalization round-trips and gates stay in (0,1)") {
    TrainConfig cfg = small_config();
    const PredictorModel m =
        init_model(kEventCount, cfg, Eigen::VectorXd::Constant(kEventCount, 3.0),
                   Eigen::VectorXd::Constant(kEventCount, 0.5));
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(kEventCount);
        for (int e = 0; e < kEventCount; ++e) x[e] = 100.0 * rng.normal();
        CHECK((m.denormalize(m.normalize(x)) - x).lpNorm<Eigen::Infinity>() <
              1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>()));
    }

    // Gate activations on random pre-activations: sigmoid output in (0,1).
    for (int trial = 0; trial < 200; ++trial) {
        const double a = 50.0 * rng.normal();
        const double s = 1.0 / (1.0 + std::exp(-a));
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}

TEST_CASE("training and predicting on a shifted trace shifts predictions") {
    const Trace trace = sinusoid_trace(400);
    Trace shifted = trace;
    const double k = 5000.0;
    for (auto& s : shifted.samples) s.counts.array() += k;

    TrainConfig cfg = small_config();
    cfg.epochs = 8;
    const TrainResult a = train({trace}, cfg);
    const TrainResult b = train({shifted}, cfg);

    const std::span<const BehaviorSample> ha(
        trace.samples.data() + 50, static_cast<std::size_t>(cfg.history_len));
    const std::span<const BehaviorSample> hb(
        shifted.samples.data() + 50, static_cast<std::size_t>(cfg.history_len));
    const Eigen::VectorXd pa = predict_next(a.model, ha);
    const Eigen::VectorXd pb = predict_next(b.model, hb);
    CHECK((pb - pa - Eigen::VectorXd::Constant(kEventCount, k))
              .lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("model files round-trip bit-exactly") {
    testutil::TempDir tmp;
    const Trace trace = sinusoid_trace(200);
    TrainConfig cfg = small_config();
    cfg.epochs = 2;
    const PredictorModel m = train({trace}, cfg).model;
    const auto path = tmp.file("model.txt");
    save_model(m, path);
    const PredictorModel back = load_model(path);
    CHECK(back.input_dim == m.input_dim);
    CHECK(back.hidden_dim == m.hidden_dim);
    CHECK(back.history_len == m.history_len);
    CHECK(back.mu == m.mu);
    CHECK(back.sigma == m.sigma);
    CHECK(back.w_gate == m.w_gate);
    CHECK(back.b_gate == m.b_gate);
    CHECK(back.w_out == m.w_out);
    CHECK(back.b_out == m.b_out);
    CHECK(back.config.learning_rate == m.config.learning_rate);
}

TEST_CASE("divergence raises a numerical error naming the epoch") {
    const Trace trace = sinusoid_trace(300);
    TrainConfig cfg = small_config();
    cfg.learning_rate = 1e155;
    cfg.clip_norm = 1e300;
    cfg.epochs = 3;
    try {
        train({trace}, cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("short traces are skipped; all-short is an error") {
    TrainConfig cfg = small_config();
    const Trace tiny = testutil::constant_trace(cfg.history_len, 1.0);
    CHECK_THROWS_AS(train({tiny}, cfg), std::invalid_argument);

    // One usable trace among short ones still trains.
    const Trace usable = testutil::constant_trace(100, 1.0);
    CHECK_NOTHROW(train({tiny, usable}, cfg));
}

TEST_CASE("predict_next validates history shape") {
    TrainConfig cfg = small_config();
    const PredictorModel m =
        init_model(kEventCount, cfg, Eigen::VectorXd::Zero(kEventCount),
                   Eigen::VectorXd::Ones(kEventCount));
    const Trace t = testutil::constant_trace(3, 1.0);
    CHECK_THROWS_AS(
        predict_next(m, std::span<const BehaviorSample>(t.samples.data(), 3)),
        FormatError);
}
