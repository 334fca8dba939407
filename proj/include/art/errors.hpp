#pragma once

#include <stdexcept>
#include <string>

namespace art {

// Dimension mismatch between operands of a tensor operation.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value (bad hyperparameter, unknown mode, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data (corpus files, checkpoints, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an API precondition (non-scalar loss, empty sequence, ...).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace art
