#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

namespace redwatch {

/// Ordered candidate event set a feature-selection pass ranks.
struct EventUniverse {
    std::vector<std::string> events;

    void validate() const;  // unique names, >= 2
    static EventUniverse full();  // the 34-counter candidate list
};

/// Per-event weight share of the leading principal component.
///
/// Columns are z-scored first (raw counter magnitudes differ by orders of
/// magnitude, which would otherwise dominate the component); pass
/// standardize=false to rank raw covariance directly. Zero-variance columns
/// get weight 0 and are left out of the eigenproblem.
Eigen::VectorXd first_pc_importance(const Eigen::MatrixXd& samples,
                                    bool standardize = true);

struct ImportanceReport {
    EventUniverse universe;
    std::vector<std::string> workloads;       // sorted by name
    Eigen::MatrixXd eta;                      // events x workloads
    Eigen::VectorXd eta_bar;                  // mean across workloads
    double threshold = 0.01;
    std::vector<int> selected;                // indices, descending eta_bar

    std::string to_csv() const;
};

/// Indices with mean importance >= threshold, ordered by descending score
/// (ties by universe order).
std::vector<int> rank_selection(const Eigen::VectorXd& eta_bar,
                                double threshold);

ImportanceReport select_features(
    const std::map<std::string, Eigen::MatrixXd>& per_workload_samples,
    const EventUniverse& universe, double threshold = 0.01);

}  // namespace redwatch
