#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "redwatch/lstm.hpp"
#include "redwatch/trace.hpp"

namespace redwatch {

/// Prediction residuals in normalized units, one column per time frame.
struct ResidualSet {
    Eigen::MatrixXd samples;  // d x n
    std::string provenance;

    Eigen::Index dim() const { return samples.rows(); }
    Eigen::Index count() const { return samples.cols(); }
};

/// Residual of each sample past the warmup window: observed minus predicted
/// next frame, both z-scored with the model's stats. Yields exactly
/// trace.size() - history_len columns.
ResidualSet compute_residuals(const PredictorModel& model, const Trace& trace);

/// Euclidean magnitude of each residual column (plotting/reporting aid).
std::vector<double> residual_magnitudes(const ResidualSet& set);

/// Concatenation preserving column order: [a, b].
ResidualSet merge(const ResidualSet& a, const ResidualSet& b);

/// Contiguous column slice [begin, begin+len).
ResidualSet slice(const ResidualSet& set, Eigen::Index begin, Eigen::Index len);

}  // namespace redwatch
