#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "redwatch/events.hpp"

namespace redwatch {

/// One sampling frame: per-interval counter deltas for the 13 events.
struct BehaviorSample {
    double t_ms = 0.0;
    Eigen::VectorXd counts;  // size kEventCount, finite, >= 0
};

/// Which scenario produced a trace. At least one field is set.
struct ScenarioLabel {
    std::optional<std::string> workload;
    std::optional<std::string> benign;
    std::optional<std::string> attack;

    bool valid() const { return workload || benign || attack; }
    std::string describe() const;
};

/// Ordered, uniformly sampled sequence of behavior samples.
/// Immutable after construction; safe to share across threads.
struct Trace {
    std::vector<BehaviorSample> samples;
    ScenarioLabel label;
    std::string source;

    int size() const { return static_cast<int>(samples.size()); }
    double interval_ms() const;

    /// Samples as a kEventCount x N column matrix.
    Eigen::MatrixXd to_matrix() const;
};

Trace load_trace(const std::string& path, const ScenarioLabel& label);
void save_trace(const Trace& trace, const std::string& path);

/// Contiguous, order-preserving split; each part size is within one sample
/// of fraction*N. Throws FormatError if any part would be empty.
std::array<Trace, 3> split_trace(const Trace& trace,
                                 const std::array<double, 3>& fractions);

/// Named-column matrix file sharing the trace CSV layout (t_ms first).
/// Used for feature-selection inputs whose schema is not the 13-event one.
struct NamedMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // N x columns
};

NamedMatrix load_named_matrix(const std::string& path);

}  // namespace redwatch
