#include "redwatch/kde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace detail {

// Bucketed kd-tree over reference columns, used only to shortlist points
// for truncated density queries.
class KdTree {
public:
    explicit KdTree(Eigen::MatrixXd points)
        : points_(std::move(points)), idx_(static_cast<std::size_t>(points_.cols())) {
        std::iota(idx_.begin(), idx_.end(), 0);
        if (!idx_.empty()) root_ = build(0, static_cast<int>(idx_.size()));
    }

    void within_radius(const Eigen::Ref<const Eigen::VectorXd>& x, double radius,
                       std::vector<int>& out) const {
        out.clear();
        if (root_ >= 0) search(root_, x, radius, radius * radius, out);
    }

    const Eigen::MatrixXd& points() const { return points_; }

private:
    static constexpr int kLeafSize = 16;

    struct Node {
        int begin = 0, end = 0;   // leaf range in idx_
        int axis = -1;            // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
    };

    int build(int begin, int end) {
        Node node;
        node.begin = begin;
        node.end = end;
        if (end - begin > kLeafSize) {
            int axis = 0;
            double best_spread = -1.0;
            for (int d = 0; d < points_.rows(); ++d) {
                double lo = points_(d, idx_[static_cast<std::size_t>(begin)]);
                double hi = lo;
                for (int i = begin + 1; i < end; ++i) {
                    const double v = points_(d, idx_[static_cast<std::size_t>(i)]);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (hi - lo > best_spread) {
                    best_spread = hi - lo;
                    axis = d;
                }
            }
            const int mid = begin + (end - begin) / 2;
            std::nth_element(idx_.begin() + begin, idx_.begin() + mid,
                             idx_.begin() + end, [&](int a, int b) {
                                 return points_(axis, a) < points_(axis, b);
                             });
            node.axis = axis;
            node.split = points_(axis, idx_[static_cast<std::size_t>(mid)]);
            const int self = static_cast<int>(nodes_.size());
            nodes_.push_back(node);
            const int left = build(begin, mid);
            const int right = build(mid, end);
            nodes_[static_cast<std::size_t>(self)].left = left;
            nodes_[static_cast<std::size_t>(self)].right = right;
            return self;
        }
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    void search(int node_id, const Eigen::Ref<const Eigen::VectorXd>& x,
                double radius, double radius_sq, std::vector<int>& out) const {
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int p = idx_[static_cast<std::size_t>(i)];
                if ((points_.col(p) - x).squaredNorm() <= radius_sq) {
                    out.push_back(p);
                }
            }
            return;
        }
        const double delta = x[node.axis] - node.split;
        if (delta <= radius) search(node.left, x, radius, radius_sq, out);
        if (delta >= -radius) search(node.right, x, radius, radius_sq, out);
    }

    Eigen::MatrixXd points_;
    std::vector<int> idx_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace detail

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double log_normalizer(Eigen::Index n, Eigen::Index d, double bandwidth) {
    return std::log(static_cast<double>(n)) +
           static_cast<double>(d) * std::log(bandwidth) +
           0.5 * static_cast<double>(d) * kLogTwoPi;
}

}  // namespace

std::string_view detector_kind_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::normal_workload: return "normal_workload";
        case DetectorKind::known_attack: return "known_attack";
        case DetectorKind::benign_program: return "benign_program";
    }
    return "?";
}

std::optional<DetectorKind> detector_kind_from_name(std::string_view name) {
    if (name == "normal_workload") return DetectorKind::normal_workload;
    if (name == "known_attack") return DetectorKind::known_attack;
    if (name == "benign_program") return DetectorKind::benign_program;
    return std::nullopt;
}

double scott_bandwidth(const Eigen::MatrixXd& reference) {
    const Eigen::Index n = reference.cols();
    const Eigen::Index d = reference.rows();
    if (n < 2) return 1.0;
    const Eigen::VectorXd mean = reference.rowwise().mean();
    const Eigen::VectorXd sd =
        ((reference.colwise() - mean).rowwise().squaredNorm() /
         static_cast<double>(n - 1))
            .cwiseSqrt();
    const double mean_sd = sd.mean();
    if (!(mean_sd > 0.0)) return 1.0;
    return std::pow(static_cast<double>(n),
                    -1.0 / (static_cast<double>(d) + 4.0)) *
           mean_sd;
}

KdeDetector::KdeDetector(Eigen::MatrixXd reference, double bandwidth,
                         double threshold, DetectorKind kind)
    : reference_(std::move(reference)),
      bandwidth_(bandwidth),
      threshold_(threshold),
      kind_(kind) {
    if (reference_.cols() == 0) {
        throw std::invalid_argument("detector needs a non-empty reference set");
    }
    if (!(bandwidth_ > 0.0)) {
        throw std::invalid_argument("bandwidth must be > 0");
    }
    if (!std::isfinite(threshold_)) {
        throw std::invalid_argument("threshold must be finite");
    }
    log_norm_ = log_normalizer(reference_.cols(), reference_.rows(), bandwidth_);
    index_ = std::make_shared<const detail::KdTree>(reference_);
}

KdeDetector KdeDetector::fit(const ResidualSet& reference, DetectorKind kind,
                             std::optional<double> bandwidth) {
    const double b = bandwidth ? *bandwidth : scott_bandwidth(reference.samples);
    return KdeDetector(reference.samples, b, 0.0, kind);
}

double KdeDetector::log_density(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != reference_.rows()) {
        throw FormatError("query dimension does not match the detector");
    }
    const double inv = -0.5 / (bandwidth_ * bandwidth_);
    const Eigen::ArrayXd exponents =
        (reference_.colwise() - x).colwise().squaredNorm().array() * inv;
    const double peak = exponents.maxCoeff();
    const double sum = (exponents - peak).exp().sum();
    return peak + std::log(sum) - log_norm_;
}

double KdeDetector::density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return std::exp(log_density(x));
}

double KdeDetector::anomaly_score(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const double logf = log_density(x);
    return -std::max(logf, std::log(kDensityFloor));
}

double KdeDetector::max_score() { return -std::log(kDensityFloor); }

double KdeDetector::density_truncated(
    const Eigen::Ref<const Eigen::VectorXd>& x, double radius) const {
    if (x.size() != reference_.rows()) {
        throw FormatError("query dimension does not match the detector");
    }
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
    std::vector<int> hits;
    index_->within_radius(x, radius, hits);
    if (hits.empty()) return 0.0;
    const double inv = -0.5 / (bandwidth_ * bandwidth_);
    Eigen::ArrayXd exponents(static_cast<Eigen::Index>(hits.size()));
    for (std::size_t i = 0; i < hits.size(); ++i) {
        exponents[static_cast<Eigen::Index>(i)] =
            (reference_.col(hits[i]) - x).squaredNorm() * inv;
    }
    const double peak = exponents.maxCoeff();
    const double sum = (exponents - peak).exp().sum();
    return std::exp(peak + std::log(sum) - log_norm_);
}

KdeDetector KdeDetector::with_threshold(double threshold) const {
    return KdeDetector(reference_, bandwidth_, threshold, kind_);
}

KdeDetector update_detector(const KdeDetector& detector,
                            const ResidualSet& fresh) {
    if (fresh.count() == 0) return detector;
    if (fresh.dim() != detector.dim()) {
        throw FormatError("appended residual dimension does not match");
    }
    Eigen::MatrixXd merged(detector.dim(), detector.count() + fresh.count());
    merged.leftCols(detector.count()) = detector.reference();
    merged.rightCols(fresh.count()) = fresh.samples;
    return KdeDetector(std::move(merged), detector.bandwidth(),
                       detector.threshold(), detector.kind());
}

std::vector<double> score_set(const KdeDetector& detector,
                              const ResidualSet& set) {
    std::vector<double> scores(static_cast<std::size_t>(set.count()));
    for (Eigen::Index i = 0; i < set.count(); ++i) {
        scores[static_cast<std::size_t>(i)] = detector.anomaly_score(set.samples.col(i));
    }
    return scores;
}

double quantile_threshold_from_scores(std::vector<double> scores,
                                      double coverage) {
    if (scores.empty()) throw std::invalid_argument("no validation scores");
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw std::invalid_argument("coverage must be in (0, 1)");
    }
    std::sort(scores.begin(), scores.end());
    const double h =
        coverage * static_cast<double>(scores.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= scores.size()) return scores.back();
    return scores[lo] + frac * (scores[lo + 1] - scores[lo]);
}

double calibrate_quantile_threshold(const KdeDetector& detector,
                                    const ResidualSet& validation,
                                    double coverage) {
    return quantile_threshold_from_scores(score_set(detector, validation),
                                          coverage);
}

double eer_threshold_from_scores(std::vector<double> positive_scores,
                                 std::vector<double> negative_scores) {
    if (positive_scores.empty() || negative_scores.empty()) {
        throw std::invalid_argument("both score sets must be non-empty");
    }
    std::sort(positive_scores.begin(), positive_scores.end());
    std::sort(negative_scores.begin(), negative_scores.end());

    std::vector<double> pooled;
    pooled.reserve(positive_scores.size() + negative_scores.size());
    pooled.insert(pooled.end(), positive_scores.begin(), positive_scores.end());
    pooled.insert(pooled.end(), negative_scores.begin(), negative_scores.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    std::vector<double> candidates;
    if (pooled.size() == 1) {
        candidates.push_back(pooled.front());
    } else {
        for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
            candidates.push_back(0.5 * (pooled[i] + pooled[i + 1]));
        }
    }

    const double np = static_cast<double>(positive_scores.size());
    const double nn = static_cast<double>(negative_scores.size());
    double best_theta = candidates.front();
    double best_diff = std::numeric_limits<double>::infinity();
    double best_fpr = std::numeric_limits<double>::infinity();
    for (const double theta : candidates) {
        // Accepted when score <= theta: negatives accepted are false
        // positives, positives rejected are false negatives.
        const double fpr =
            static_cast<double>(std::upper_bound(negative_scores.begin(),
                                                 negative_scores.end(), theta) -
                                negative_scores.begin()) /
            nn;
        const double fnr =
            static_cast<double>(positive_scores.end() -
                                std::upper_bound(positive_scores.begin(),
                                                 positive_scores.end(), theta)) /
            np;
        const double diff = std::abs(fpr - fnr);
        if (diff < best_diff || (diff == best_diff && fpr < best_fpr) ||
            (diff == best_diff && fpr == best_fpr && theta < best_theta)) {
            best_diff = diff;
            best_fpr = fpr;
            best_theta = theta;
        }
    }
    return best_theta;
}

double calibrate_eer_threshold(const KdeDetector& detector,
                               const ResidualSet& positives,
                               const ResidualSet& negatives) {
    return eer_threshold_from_scores(score_set(detector, positives),
                                     score_set(detector, negatives));
}

void save_detector(const KdeDetector& detector, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "redwatch-detector v1\n";
    out << "kind " << detector_kind_name(detector.kind()) << '\n';
    out << "bandwidth " << textio::format_double(detector.bandwidth()) << '\n';
    out << "threshold " << textio::format_double(detector.threshold()) << '\n';
    out << "dim " << detector.dim() << '\n';
    out << "count " << detector.count() << '\n';
    textio::write_matrix_rows(out, detector.reference().transpose());
    out << "end\n";
    if (!out) throw FormatError("write failed for '" + path + "'");
}

KdeDetector load_detector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw FormatError(path + ": truncated detector file");
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next_line() != "redwatch-detector v1") {
        throw FormatError(path + ": not a redwatch detector file");
    }
    auto field = [&](const std::string& key) {
        next_line();
        if (line.rfind(key + ' ', 0) != 0) {
            throw FormatError(path + ": expected '" + key + "'");
        }
        return line.substr(key.size() + 1);
    };
    const auto kind = detector_kind_from_name(field("kind"));
    if (!kind) throw FormatError(path + ": unknown detector kind");
    const double bandwidth = textio::parse_double(field("bandwidth"), path);
    const double threshold = textio::parse_double(field("threshold"), path);
    const long dim = textio::parse_long(field("dim"), path);
    const long count = textio::parse_long(field("count"), path);
    if (dim <= 0 || count <= 0) {
        throw FormatError(path + ": non-positive detector dimensions");
    }
    Eigen::MatrixXd reference(dim, count);
    for (long i = 0; i < count; ++i) {
        next_line();
        std::istringstream iss(line);
        for (long d = 0; d < dim; ++d) {
            std::string tok;
            if (!(iss >> tok)) throw FormatError(path + ": short reference row");
            reference(d, i) = textio::parse_double(tok, path);
        }
    }
    if (next_line() != "end") throw FormatError(path + ": missing end marker");
    if (!reference.allFinite()) {
        throw FormatError(path + ": non-finite reference samples");
    }
    return KdeDetector(std::move(reference), bandwidth, threshold, *kind);
}

}  // namespace redwatch
