#pragma once

#include <stdexcept>
#include <string>

namespace engine {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A distribution or copula parameter is outside its admissible domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

// A model term references a feature or level the record does not carry.
class SchemaError : public Error {
public:
    using Error::Error;
};

// An input is structurally valid but degenerate for the requested operation
// (constant vector to a min-max normalizer, empty in-range set, ...).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Node id not present in the graph.
class LookupError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& msg, double best_intercept, double best_imbalance)
        : Error(msg), best_intercept(best_intercept), best_imbalance(best_imbalance) {}
    double best_intercept;
    double best_imbalance;
};

// Exactly collinear design matrix in a regression fit.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace engine
