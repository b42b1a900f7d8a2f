// Shared scalar/matrix aliases and the error taxonomy used across the library.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace deepsta {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Shape/size disagreement between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf where a finite value is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or unparseable config.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing, malformed, or out-of-range input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A required pair of graph nodes cannot reach each other.
struct ConnectivityError : DataError {
  using DataError::DataError;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace deepsta
