#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace hawkesvol {

// Three failure families; the CLI maps them onto distinct exit codes.

/// Invalid configuration or parameter bundle supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent input data (CSV schema, crossed quotes, tick mismatch).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IllConditionedError : public NumericalError {
public:
    explicit IllConditionedError(double condition)
        : NumericalError("ill-conditioned system (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Raised when a parameter bundle violates a model invariant; `violation()` names it
/// ("mu nonpositive", "unstable", ...).
class InvalidParams : public ConfigError {
public:
    explicit InvalidParams(std::string violation)
        : ConfigError("invalid parameters: " + violation), violation_(std::move(violation)) {}

    [[nodiscard]] const std::string& violation() const noexcept { return violation_; }

private:
    std::string violation_;
};

}  // namespace hawkesvol
