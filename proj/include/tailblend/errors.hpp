#pragma once

#include <stdexcept>
#include <string>

namespace tailblend {

// Unusable input data: missing files or columns, empty selections,
// non-positive responses where parametric marginals are required.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Estimation failure: degenerate components, rank-deficient designs, or no
// usable fit in an ensemble.
struct FitError : std::runtime_error {
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace tailblend
