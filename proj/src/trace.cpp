#include "redwatch/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "redwatch/error.hpp"
#include "redwatch/textio.hpp"

namespace redwatch {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Interval uniformity allows 1e-6 ms of slack; a real mismatch is a hard
// error rather than a resample, which would distort downstream residuals.
constexpr double kIntervalSlackMs = 1e-6;

}  // namespace

std::string ScenarioLabel::describe() const {
    std::string s;
    if (workload) s += "workload=" + *workload;
    if (benign) s += (s.empty() ? "" : " ") + ("benign=" + *benign);
    if (attack) s += (s.empty() ? "" : " ") + ("attack=" + *attack);
    return s.empty() ? "unlabeled" : s;
}

double Trace::interval_ms() const {
    if (samples.size() < 2) return 0.0;
    return samples[1].t_ms - samples[0].t_ms;
}

Eigen::MatrixXd Trace::to_matrix() const {
    Eigen::MatrixXd m(kEventCount, size());
    for (int i = 0; i < size(); ++i) m.col(i) = samples[i].counts;
    return m;
}

NamedMatrix load_named_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    line = strip_cr(line);

    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t_ms") {
        throw FormatError(path + ": header must start with t_ms");
    }
    NamedMatrix out;
    out.columns.assign(header.begin() + 1, header.end());
    const std::size_t ncols = header.size();

    std::vector<double> flat;
    std::vector<double> times;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (fields.size() != ncols) {
            throw FormatError(ctx + ": expected " + std::to_string(ncols) +
                              " columns, got " + std::to_string(fields.size()));
        }
        times.push_back(textio::parse_double(fields[0], ctx));
        for (std::size_t c = 1; c < ncols; ++c) {
            flat.push_back(textio::parse_double(fields[c], ctx));
        }
    }
    if (times.empty()) throw FormatError(path + ": no data rows");

    const Eigen::Index rows = static_cast<Eigen::Index>(times.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(ncols - 1);
    out.values.resize(rows, cols + 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
        out.values(r, 0) = times[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            out.values(r, c + 1) = flat[static_cast<std::size_t>(r * cols + c)];
        }
    }
    // First column is time; keep it alongside data so callers can validate.
    out.columns.insert(out.columns.begin(), "t_ms");
    return out;
}

Trace load_trace(const std::string& path, const ScenarioLabel& label) {
    NamedMatrix raw = load_named_matrix(path);

    if (raw.columns.size() != static_cast<std::size_t>(kEventCount) + 1) {
        throw FormatError(path + ": expected " + std::to_string(kEventCount) +
                          " event columns, got " +
                          std::to_string(raw.columns.size() - 1));
    }
    const auto& names = event_names();
    for (int i = 0; i < kEventCount; ++i) {
        if (raw.columns[static_cast<std::size_t>(i) + 1] != names[i]) {
            throw FormatError(path + ": column " + std::to_string(i + 1) +
                              " is '" + raw.columns[static_cast<std::size_t>(i) + 1] +
                              "', expected '" + std::string(names[i]) + "'");
        }
    }

    Trace trace;
    trace.label = label;
    trace.source = path;
    const Eigen::Index n = raw.values.rows();
    trace.samples.reserve(static_cast<std::size_t>(n));

    double interval = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        BehaviorSample s;
        s.t_ms = raw.values(r, 0);
        s.counts = raw.values.row(r).segment(1, kEventCount).transpose();
        for (int e = 0; e < kEventCount; ++e) {
            const double v = s.counts[e];
            if (!std::isfinite(v) || v < 0.0) {
                throw FormatError(path + ": row " + std::to_string(r + 1) +
                                  " has negative or non-finite count");
            }
        }
        if (r > 0) {
            const double dt = s.t_ms - trace.samples.back().t_ms;
            if (dt <= 0.0) {
                throw FormatError(path + ": non-monotone timestamp at row " +
                                  std::to_string(r + 1));
            }
            if (r == 1) {
                interval = dt;
            } else if (std::abs(dt - interval) > kIntervalSlackMs) {
                throw FormatError(path + ": sampling interval changes at row " +
                                  std::to_string(r + 1));
            }
        }
        trace.samples.push_back(std::move(s));
    }
    return trace;
}

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "t_ms";
    for (const auto name : event_names()) out << ',' << name;
    out << '\n';
    for (const auto& s : trace.samples) {
        out << textio::format_double(s.t_ms);
        for (int e = 0; e < kEventCount; ++e) {
            out << ',' << textio::format_double(s.counts[e]);
        }
        out << '\n';
    }
    if (!out) throw FormatError("write failed for '" + path + "'");
}

std::array<Trace, 3> split_trace(const Trace& trace,
                                 const std::array<double, 3>& fractions) {
    double sum = 0.0;
    for (const double f : fractions) {
        if (!(f > 0.0)) throw std::invalid_argument("split fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }
    const int n = trace.size();
    const int b1 = static_cast<int>(std::lround(fractions[0] * n));
    const int b2 = static_cast<int>(std::lround((fractions[0] + fractions[1]) * n));
    const std::array<int, 3> sizes = {b1, b2 - b1, n - b2};
    for (const int s : sizes) {
        if (s <= 0) {
            throw FormatError("trace too short to split: " + std::to_string(n) +
                              " samples");
        }
    }

    std::array<Trace, 3> parts;
    int offset = 0;
    for (int p = 0; p < 3; ++p) {
        parts[p].label = trace.label;
        parts[p].source = trace.source + "#part" + std::to_string(p);
        parts[p].samples.assign(trace.samples.begin() + offset,
                                trace.samples.begin() + offset + sizes[p]);
        offset += sizes[p];
    }
    return parts;
}

}  // namespace redwatch
