#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "redwatch/trace.hpp"

namespace redwatch {

struct TrainConfig {
    double learning_rate = 0.05;
    double lr_decay = 0.5;   // applied every decay_every epochs
    int decay_every = 10;
    int epochs = 30;
    int batch_size = 32;
    int history_len = 16;
    int hidden_dim = 32;
    double clip_norm = 5.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Single-cell LSTM next-sample predictor over z-scored behavior samples.
///
/// Gate weights are stacked row-wise as [input; forget; output; candidate],
/// each block hidden_dim x (input_dim + hidden_dim). The readout maps the
/// final hidden state back to one sample. Immutable once trained; inference
/// is read-only and safe to share across threads.
struct PredictorModel {
    int input_dim = 0;
    int hidden_dim = 0;
    int history_len = 0;
    Eigen::MatrixXd w_gate;  // 4h x (d+h)
    Eigen::VectorXd b_gate;  // 4h
    Eigen::MatrixXd w_out;   // d x h
    Eigen::VectorXd b_out;   // d
    Eigen::VectorXd mu;      // d, training data mean
    Eigen::VectorXd sigma;   // d, training data std, floored at 1e-8
    TrainConfig config;

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
        return (x - mu).cwiseQuotient(sigma);
    }
    Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const {
        return z.cwiseProduct(sigma) + mu;
    }

    /// Predicted normalized next column for each window in the batch.
    /// steps[t] holds column b's window sample at offset t (d x batch).
    Eigen::MatrixXd forward(const std::vector<Eigen::MatrixXd>& steps) const;
};

struct TrainResult {
    PredictorModel model;
    std::vector<double> epoch_loss;  // mean training MSE per epoch
};

/// Seeded random initialization: gate and readout weights uniform in
/// +-1/sqrt(hidden_dim), forget-gate bias shifted by +1.
PredictorModel init_model(int input_dim, const TrainConfig& cfg,
                          const Eigen::VectorXd& mu,
                          const Eigen::VectorXd& sigma);

/// Fits the predictor on normal traces with plain SGD; deterministic for a
/// fixed seed. Traces shorter than history_len+1 are skipped with a warning;
/// throws if nothing is left. Throws NumericError on divergence.
TrainResult train(const std::vector<Trace>& traces, const TrainConfig& cfg);

/// De-normalized next-sample prediction from the last history_len samples.
Eigen::VectorXd predict_next(const PredictorModel& model,
                             std::span<const BehaviorSample> history);

/// Max relative error between analytic and central finite-difference
/// gradients over `count` randomly chosen parameters (step 1e-5).
/// `windows` are (trace matrix, start) batch entries in normalized units.
struct GradCheckBatch {
    std::vector<Eigen::MatrixXd> steps;  // length history_len, each d x B
    Eigen::MatrixXd targets;             // d x B
};

GradCheckBatch make_batch(const PredictorModel& model, const Trace& trace,
                          const std::vector<int>& starts);

double grad_check(const PredictorModel& model, const GradCheckBatch& batch,
                  int count = 100, std::uint64_t seed = 7);

void save_model(const PredictorModel& model, const std::string& path);
PredictorModel load_model(const std::string& path);

}  // namespace redwatch
