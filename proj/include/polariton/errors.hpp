// errors.hpp: exception types shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace polariton {

// Invalid, missing or unknown configuration input. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent array or model dimensions.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure. Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Band labelling failed (e.g. no dark or bright band present).
struct LabelError : NumericalError {
    using NumericalError::NumericalError;
};

// Bloch eigenvector phase could not be fixed.
struct GaugeError : NumericalError {
    using NumericalError::NumericalError;
};

// g2 denominator vanishes.
struct UndefinedCorrelationError : NumericalError {
    using NumericalError::NumericalError;
};

// Product state violates positivity or the blockade window after projection.
struct ConstraintError : NumericalError {
    ConstraintError(const std::string& msg, int site_index) : NumericalError(msg), site(site_index) {}
    int site;
};

// Attractive van der Waals interaction requested.
struct UnsupportedInteractionError : ConfigError {
    using ConfigError::ConfigError;
};

// Value outside the domain of an observable.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace polariton
