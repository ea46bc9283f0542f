#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mcrd {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid user input (bad parameter ranges, malformed config). CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

struct XiOutOfRange : ConfigError {
    using ConfigError::ConfigError;
};

// Structural assumptions on the nonlinearity do not hold. CLI exit code 4.
struct AssumptionError : Error {
    using Error::Error;
};

struct NotBistable : AssumptionError {
    using AssumptionError::AssumptionError;
};

struct FoldNotFound : AssumptionError {
    using AssumptionError::AssumptionError;
};

struct NoMaxwellPoint : AssumptionError {
    using AssumptionError::AssumptionError;
};

struct MultipleMaxwellPoints : AssumptionError {
    MultipleMaxwellPoints(const std::string& msg, std::vector<double> candidates_)
        : AssumptionError(msg), candidates(std::move(candidates_)) {}
    std::vector<double> candidates;
};

// Solver/numerics failures. CLI exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

struct DegeneratePotential : NumericalError {
    using NumericalError::NumericalError;
};

struct NewtonDiverged : NumericalError {
    using NumericalError::NumericalError;
};

struct JacobianSingular : NumericalError {
    using NumericalError::NumericalError;
};

struct EigensolverFailed : NumericalError {
    using NumericalError::NumericalError;
};

struct AmbiguousMassMode : NumericalError {
    using NumericalError::NumericalError;
};

struct StepRejected : NumericalError {
    using NumericalError::NumericalError;
};

struct FitFailed : NumericalError {
    using NumericalError::NumericalError;
};

// File/CSV/JSON parsing. CLI exit code 3.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace mcrd
