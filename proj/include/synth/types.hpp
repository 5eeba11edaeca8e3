#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace synth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Base of every error raised by the library. `operation()` names the
// operation that failed so the CLI can surface it in its error document.
class Error : public std::runtime_error {
public:
  Error(std::string operation, const std::string& message)
      : std::runtime_error(message), operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

private:
  std::string operation_;
};

// Invalid hyperparameters or preconditions on sizes.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Incompatible matrix/vector shapes or unknown names.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Linear algebra failure: singular systems, covariances that cannot be repaired.
class NumericError : public Error {
public:
  using Error::Error;
};

// Malformed input files or documents.
class ParseError : public Error {
public:
  using Error::Error;
};

// Data-dependent contract violations (e.g. a class with too few rows).
class DataError : public Error {
public:
  using Error::Error;
};

}  // namespace synth
