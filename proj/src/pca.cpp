#include "redwatch/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/events.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace {

constexpr double kPowerTol = 1e-12;
constexpr int kPowerMaxIter = 10000;

// Leading eigenvector of a symmetric PSD matrix by power iteration from a
// fixed all-ones start, sign fixed so the first sizable entry is positive.
Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& cov) {
    const Eigen::Index d = cov.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d);
    v.normalize();
    for (int iter = 0; iter < kPowerMaxIter; ++iter) {
        Eigen::VectorXd next = cov * v;
        const double norm = next.norm();
        if (norm == 0.0) break;  // start vector orthogonal to range; keep v
        next /= norm;
        if (next.dot(v) < 0.0) next = -next;
        const double delta = (next - v).norm();
        v = next;
        if (delta < kPowerTol) break;
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) v = -v;
            break;
        }
    }
    return v;
}

}  // namespace

void EventUniverse::validate() const {
    if (events.size() < 2) {
        throw std::invalid_argument("event universe needs at least 2 events");
    }
    std::set<std::string> seen(events.begin(), events.end());
    if (seen.size() != events.size()) {
        throw std::invalid_argument("event universe has duplicate names");
    }
}

EventUniverse EventUniverse::full() {
    return EventUniverse{full_event_universe()};
}

Eigen::VectorXd first_pc_importance(const Eigen::MatrixXd& samples,
                                    bool standardize) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (n < 2) throw std::invalid_argument("need at least 2 samples");
    if (d < 2) throw std::invalid_argument("need at least 2 events");

    const Eigen::VectorXd mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
    Eigen::VectorXd sd =
        (centered.colwise().squaredNorm() / static_cast<double>(n - 1))
            .cwiseSqrt()
            .transpose();

    // A column is constant when its spread vanishes at the scale of its mean.
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double floor = 1e-12 * std::max(1.0, std::abs(mean[j]));
        if (sd[j] > floor) active.push_back(j);
    }
    if (active.empty()) {
        throw NumericError("degenerate-covariance: all events are constant");
    }

    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
        z.col(static_cast<Eigen::Index>(k)) = centered.col(active[k]);
        if (standardize) z.col(static_cast<Eigen::Index>(k)) /= sd[active[k]];
    }
    const Eigen::MatrixXd cov =
        z.transpose() * z / static_cast<double>(n - 1);

    const Eigen::VectorXd w = leading_eigenvector(cov);
    const double l1 = w.lpNorm<1>();
    if (!(l1 > 0.0)) {
        throw NumericError("degenerate-covariance: null leading component");
    }

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < active.size(); ++k) {
        eta[active[k]] = std::abs(w[static_cast<Eigen::Index>(k)]) / l1;
    }
    return eta;
}

std::vector<int> rank_selection(const Eigen::VectorXd& eta_bar,
                                double threshold) {
    std::vector<int> idx(static_cast<std::size_t>(eta_bar.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return eta_bar[a] > eta_bar[b];
    });
    std::vector<int> selected;
    for (const int i : idx) {
        if (eta_bar[i] >= threshold) selected.push_back(i);
    }
    return selected;
}

ImportanceReport select_features(
    const std::map<std::string, Eigen::MatrixXd>& per_workload_samples,
    const EventUniverse& universe, double threshold) {
    universe.validate();
    if (per_workload_samples.empty()) {
        throw std::invalid_argument("need at least one workload");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(universe.events.size());

    ImportanceReport report;
    report.universe = universe;
    report.threshold = threshold;
    report.eta.resize(d, static_cast<Eigen::Index>(per_workload_samples.size()));

    Eigen::Index col = 0;
    for (const auto& [name, samples] : per_workload_samples) {
        if (samples.cols() != d) {
            throw FormatError("workload '" + name + "' has " +
                              std::to_string(samples.cols()) +
                              " columns, universe has " + std::to_string(d));
        }
        try {
            report.eta.col(col) = first_pc_importance(samples);
        } catch (const NumericError& e) {
            throw NumericError("workload '" + name + "': " + e.what());
        }
        report.workloads.push_back(name);
        ++col;
    }
    report.eta_bar = report.eta.rowwise().mean();
    report.selected = rank_selection(report.eta_bar, threshold);
    return report;
}

std::string ImportanceReport::to_csv() const {
    std::ostringstream os;
    os << "event";
    for (const auto& w : workloads) os << ",eta_" << w;
    os << ",eta_bar,selected\n";
    std::vector<char> is_selected(universe.events.size(), 0);
    for (const int i : selected) is_selected[static_cast<std::size_t>(i)] = 1;
    for (std::size_t e = 0; e < universe.events.size(); ++e) {
        os << universe.events[e];
        for (Eigen::Index c = 0; c < eta.cols(); ++c) {
            os << ',' << textio::format_double(eta(static_cast<Eigen::Index>(e), c));
        }
        os << ',' << textio::format_double(eta_bar[static_cast<Eigen::Index>(e)]);
        os << ',' << (is_selected[e] ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace redwatch
