#pragma once

#include <Eigen/Core>
#include <charconv>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

#include "redwatch/error.hpp"

namespace redwatch::textio {

/// Shortest round-trippable decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw FormatError(context + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw FormatError(context + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        os << format_double(v[i]);
    }
    os << '\n';
}

inline void write_matrix_rows(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << format_double(m(r, c));
        }
        os << '\n';
    }
}

}  // namespace redwatch::textio
