// errors.hpp: exception types shared by every qbm module

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

// Input outside the mathematical domain of an operation (negative frequency,
// negative temperature profile, non-integrable endpoint, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Lookup outside a tabulated range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// An operation that is only defined for some bath regimes.
class UnsupportedRegime : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for numeric failures (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericError {
public:
    QuadratureError(const std::string& what, double achieved, double requested)
        : NumericError(what + " (achieved error " + std::to_string(achieved) +
                       ", requested " + std::to_string(requested) + ")"),
          achieved_(achieved), requested_(requested) {}

    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

// Explicit time step outside the stability region of the stepper.
class StabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

// Integrator produced a state violating a physical invariant.
class IntegratorError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace qbm
