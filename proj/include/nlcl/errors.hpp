#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlcl {

/// A consecutive pair of quantile values with zero or negative spacing where
/// a strictly increasing state was required. `index` is the left value.
struct DegenerateGap : std::runtime_error {
    std::size_t index;
    DegenerateGap(std::size_t i, const std::string& msg)
        : std::runtime_error(msg), index(i) {}
};

/// A decreasing state was passed to an operation that needs ordered values.
struct OrderViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The integrator detected an order violation beyond tolerance. The caller
/// is expected to retry with `dt_suggested`.
struct StepRejected : std::runtime_error {
    double dt_used;
    double dt_suggested;
    StepRejected(double used, const std::string& msg)
        : std::runtime_error(msg), dt_used(used), dt_suggested(used / 2) {}
};

/// Too few snapshots to resolve a test bump in time.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (missing or ill-typed fields).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nlcl
