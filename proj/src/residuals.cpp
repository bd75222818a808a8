#include "redwatch/residuals.hpp"

#include "redwatch/error.hpp"

namespace redwatch {

ResidualSet compute_residuals(const PredictorModel& model, const Trace& trace) {
    const int L = model.history_len;
    const int n = trace.size();
    if (n <= L) {
        throw FormatError("trace too short: " + std::to_string(n) +
                          " samples, need > " + std::to_string(L));
    }
    const int d = model.input_dim;
    Eigen::MatrixXd norm(d, n);
    for (int i = 0; i < n; ++i) {
        const auto& counts = trace.samples[static_cast<std::size_t>(i)].counts;
        if (counts.size() != d) {
            throw FormatError("sample dimension does not match the model");
        }
        norm.col(i) = model.normalize(counts);
    }

    // One batched pass: window b covers columns [b, b+L), target b+L.
    const Eigen::Index batch = n - L;
    std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(L));
    for (int t = 0; t < L; ++t) {
        steps[static_cast<std::size_t>(t)] = norm.middleCols(t, batch);
    }
    const Eigen::MatrixXd predicted = model.forward(steps);

    ResidualSet out;
    out.samples = norm.rightCols(batch) - predicted;
    out.provenance = trace.label.describe() + " (" + trace.source + ")";
    return out;
}

std::vector<double> residual_magnitudes(const ResidualSet& set) {
    std::vector<double> out(static_cast<std::size_t>(set.count()));
    for (Eigen::Index i = 0; i < set.count(); ++i) {
        out[static_cast<std::size_t>(i)] = set.samples.col(i).norm();
    }
    return out;
}

ResidualSet merge(const ResidualSet& a, const ResidualSet& b) {
    if (a.count() == 0) return b;
    if (b.count() == 0) return a;
    if (a.dim() != b.dim()) throw FormatError("residual dimensions differ");
    ResidualSet out;
    out.samples.resize(a.dim(), a.count() + b.count());
    out.samples.leftCols(a.count()) = a.samples;
    out.samples.rightCols(b.count()) = b.samples;
    out.provenance = a.provenance + " + " + b.provenance;
    return out;
}

ResidualSet slice(const ResidualSet& set, Eigen::Index begin, Eigen::Index len) {
    if (begin < 0 || len < 0 || begin + len > set.count()) {
        throw std::invalid_argument("slice out of range");
    }
    ResidualSet out;
    out.samples = set.samples.middleCols(begin, len);
    out.provenance = set.provenance;
    return out;
}

}  // namespace redwatch
