#pragma once

#include <stdexcept>
#include <string>

namespace mmdn {

// Caller broke a documented precondition (wrong shape, invalid argument, ...).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularMatrixError : std::runtime_error {
    double condition_estimate;
    explicit SingularMatrixError(double cond)
        : std::runtime_error("matrix is singular to working precision (condition estimate " +
                             std::to_string(cond) + ")"),
          condition_estimate(cond) {}
};

struct UnsupportedKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllConditionedRatioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mmdn
