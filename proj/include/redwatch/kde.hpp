#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redwatch/residuals.hpp"

namespace redwatch {

enum class DetectorKind { normal_workload, known_attack, benign_program };

std::string_view detector_kind_name(DetectorKind kind);
std::optional<DetectorKind> detector_kind_from_name(std::string_view name);

/// Isotropic-bandwidth rule of thumb: n^(-1/(d+4)) times the mean
/// per-dimension sample standard deviation (1 when that spread is zero).
double scott_bandwidth(const Eigen::MatrixXd& reference);

namespace detail {
class KdTree;
}

/// Gaussian kernel density estimate over a reference residual set, with an
/// anomaly-score threshold attached. Immutable after construction; queries
/// are read-only and safe to run concurrently.
///
/// Density at x is the kernel sum over all reference columns,
///   sum_i exp(-|x - x_i|^2 / (2 b^2)) / (n b^d (2 pi)^(d/2)),
/// evaluated in log space so distant queries underflow gracefully.
class KdeDetector {
public:
    KdeDetector(Eigen::MatrixXd reference, double bandwidth, double threshold,
                DetectorKind kind);

    /// Builds with Scott's-rule bandwidth unless one is given. Threshold
    /// starts at 0; calibrate and attach it with with_threshold().
    static KdeDetector fit(const ResidualSet& reference, DetectorKind kind,
                           std::optional<double> bandwidth = std::nullopt);

    double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// -log density, floored so the score never exceeds -log(1e-300).
    double anomaly_score(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// In-class decision: the query scores at or below the threshold.
    bool accepts(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        return anomaly_score(x) <= threshold_;
    }

    /// Kernel sum restricted to reference points within `radius` of x
    /// (same normalizer). With radius >= 10 bandwidths the result tracks
    /// the exact density to well under 1e-9 relative wherever the density
    /// is non-negligible.
    double density_truncated(const Eigen::Ref<const Eigen::VectorXd>& x,
                             double radius) const;

    KdeDetector with_threshold(double threshold) const;

    Eigen::Index dim() const { return reference_.rows(); }
    Eigen::Index count() const { return reference_.cols(); }
    double bandwidth() const { return bandwidth_; }
    double threshold() const { return threshold_; }
    DetectorKind kind() const { return kind_; }
    const Eigen::MatrixXd& reference() const { return reference_; }

    /// Highest representable anomaly score (the density floor, logged).
    static double max_score();

private:
    Eigen::MatrixXd reference_;  // d x n
    double bandwidth_;
    double threshold_;
    DetectorKind kind_;
    double log_norm_;  // log of n * b^d * (2 pi)^(d/2)
    std::shared_ptr<const detail::KdTree> index_;
};

/// Detector over the old reference plus `fresh` columns; bandwidth and
/// threshold carry over unchanged (recalibration is a separate step).
KdeDetector update_detector(const KdeDetector& detector,
                            const ResidualSet& fresh);

/// Anomaly scores of every column of `set` under `detector`.
std::vector<double> score_set(const KdeDetector& detector,
                              const ResidualSet& set);

/// Linear-interpolated order statistic of the validation anomaly scores at
/// the requested coverage (default: 80% of normal validation accepted).
double calibrate_quantile_threshold(const KdeDetector& detector,
                                    const ResidualSet& validation,
                                    double coverage = 0.80);

/// Threshold minimizing |FPR - FNR| over midpoints of adjacent pooled
/// scores; ties broken by smaller FPR, then smaller threshold. Positives
/// are in-class (accepted when score <= threshold), negatives out-of-class.
double calibrate_eer_threshold(const KdeDetector& detector,
                               const ResidualSet& positives,
                               const ResidualSet& negatives);

/// Same sweep on precomputed score sets; exposed for calibration tests.
double eer_threshold_from_scores(std::vector<double> positive_scores,
                                 std::vector<double> negative_scores);

double quantile_threshold_from_scores(std::vector<double> scores,
                                      double coverage);

void save_detector(const KdeDetector& detector, const std::string& path);
KdeDetector load_detector(const std::string& path);

}  // namespace redwatch
