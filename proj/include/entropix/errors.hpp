// errors.hpp — exception taxonomy shared by all entropix components
#pragma once

#include <stdexcept>
#include <string>

namespace entropix {

// Malformed configuration or invalid model parameters (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical contract was violated (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Resource cap exceeded, e.g. the 2^N many-body engine past N = 12 (CLI exit code 4).
class CapError : public std::runtime_error {
public:
    explicit CapError(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature did not reach the requested tolerance; carries what it achieved.
class QuadratureError : public NumericError {
public:
    QuadratureError(const std::string& what, double achieved)
        : NumericError(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

} // namespace entropix
