#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mfg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Invalid user input: bad dimensions, malformed config, out-of-range values.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A model fails a standing assumption required by the requested operation
// (e.g. strict control convexity).
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative routine exhausted its budget before reaching tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual(residual), iterations(iterations) {}
    double residual = 0.0;
    int iterations = 0;
};

} // namespace mfg
