#pragma once

#include <stdexcept>
#include <string>

namespace hsac {

// Bad dimensions, bad hyperparameters, malformed run configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses or gradients during an update.
struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// An action that does not conform to its action layout.
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointVersionError : CheckpointError {
  explicit CheckpointVersionError(const std::string& msg) : CheckpointError(msg) {}
};

struct CheckpointDigestError : CheckpointError {
  explicit CheckpointDigestError(const std::string& msg) : CheckpointError(msg) {}
};

struct CheckpointFormatError : CheckpointError {
  explicit CheckpointFormatError(const std::string& msg) : CheckpointError(msg) {}
};

// A distribution-matching run whose loss became non-finite.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hsac
