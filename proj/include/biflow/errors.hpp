#pragma once

#include <stdexcept>
#include <string>

namespace biflow {

/// Invalid configuration: bad grid parameters, unknown config keys,
/// unsupported p in L_T^p, and similar. CLI maps this to exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (negative time, trajectory
/// not covering the requested interval, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quadrature or refinement loop exhausted its budget without reaching
/// the requested accuracy. Reported, never silently degraded.
/// CLI maps this (and non-convergence) to exit code 4.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Perturbation iteration diverged: the data violated the smallness
/// assumptions of the fixed-point argument.
struct SmallnessViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace biflow
