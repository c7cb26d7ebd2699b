#pragma once

#include <stdexcept>
#include <string>

namespace leedecay {

// Invalid parameters, grids, step sizes or config entries.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Principal-value point outside the momentum grid's coverage.
class CoverageError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation called in the wrong stability regime.
class RegimeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class RootFindingError : public std::runtime_error {
public:
    RootFindingError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Density-matrix invariant broken during time stepping.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace leedecay
