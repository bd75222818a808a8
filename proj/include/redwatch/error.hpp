#pragma once

#include <stdexcept>
#include <string>

namespace redwatch {

/// Malformed or inconsistent input data (files, schemas, wire formats).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, degenerate covariance, non-finite values.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace redwatch
