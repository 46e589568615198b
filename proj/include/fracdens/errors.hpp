#pragma once

#include <stdexcept>
#include <string>

namespace fracdens {

// Raised when a study configuration is malformed or inconsistent
// (unknown model name, missing field, negative replication count, ...).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when inputs are syntactically fine but violate a mathematical
// precondition of the requested computation (observation horizon too short
// for bandwidth selection, kappa not exceeding the sub-Gaussian constant,
// non-positive-definite covariance embedding without a fallback, ...).
// The CLI maps this to exit code 3.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracdens
