#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace asd {

/* Base for all library errors. */
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Argument outside the mathematical domain of a function. */
struct DomainError : Error {
    using Error::Error;
};

/* Scenario parameters that cannot be simulated (degenerate event counts,
 * inconsistent plan, prevalence draws of 0 or 1, ...). */
struct InvalidScenario : Error {
    using Error::Error;
};

/* Selection rule with inconsistent parameters. */
struct InvalidRule : Error {
    using Error::Error;
};

/* Requested combination is not supported by the method. */
struct Unsupported : Error {
    using Error::Error;
};

/* Covariance matrix is not positive semidefinite within tolerance. */
struct NotPositiveSemidefinite : Error {
    NotPositiveSemidefinite(std::size_t pivot, double value)
        : Error("matrix is not positive semidefinite: pivot " +
                std::to_string(pivot) + " is " + std::to_string(value)),
          pivot(pivot),
          value(value) {}
    std::size_t pivot;
    double value;
};

/* Configuration document violates the schema. `key` names the offending
 * entry. */
struct ConfigError : Error {
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key(std::move(key)) {}
    std::string key;
};

}  // namespace asd
