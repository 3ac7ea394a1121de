#pragma once

#include <stdexcept>
#include <string>

namespace spikebench {

// Shape / structural mismatches between tensors or layers.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input files (IDX, CIFAR, CSV). Message carries the byte
// offset or row/column where parsing failed.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration (bad fractions, unknown dataset, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual(residual) {}
    double residual;
};

// Non-finite values encountered during simulation or training.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace spikebench
