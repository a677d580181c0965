#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace negbound {

/// Numerical failure (quadrature non-convergence, catastrophic cancellation,
/// non-finite loss outside of training).  Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training divergence.  Carries the loss trace up to the failing epoch.
/// Maps to CLI exit code 4.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, std::vector<double> trace)
        : std::runtime_error(msg), loss_trace(std::move(trace)) {}
    std::vector<double> loss_trace;
};

}  // namespace negbound
