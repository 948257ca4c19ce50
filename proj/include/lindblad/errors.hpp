// errors.hpp — Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace lindblad {

// A precondition on physical inputs was violated (bad potential geometry,
// non-positive variance, invalid Lindblad parameters, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Adaptive step control could not meet the tolerance at the minimum step,
// or event location failed to converge.
struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Covariance matrix is not positive definite where it has to be.
struct DegenerateCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The tunneling probability underflowed; the decay rate is undefined.
struct RateUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bisection endpoints classify identically; no critical point is bracketed.
struct BracketError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature did not converge.
struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file is syntactically malformed (carries line/column).
struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

// Config file parsed fine but violates a documented precondition.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace lindblad
