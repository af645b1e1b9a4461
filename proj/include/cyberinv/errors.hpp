#pragma once

#include <stdexcept>
#include <string>

namespace cyberinv {

/// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Hawkes parameters violate beta < xi, so the moment formulas do not exist.
class StabilityError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// An investment strategy produced an inadmissible (negative or non-finite) rate.
class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time integration failed (step-size underflow, singular Newton matrix, ...).
class SolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A relative gain was requested against a benchmark value <= 0.
class UndefinedGainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Inconsistent run configuration, e.g. a field solved for different parameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cyberinv
