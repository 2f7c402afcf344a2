#pragma once

#include <stdexcept>
#include <string>

namespace fundusq {

/// Raised when an input falls outside a metric's mathematical domain
/// (log of zero, negative intensity, all-zero image for EFC, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed arguments: mismatched dimensions, even kernels, bad parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The fundus mask came out empty (nothing brighter than the threshold).
class DegenerateMaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, decoded or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Model or CSV files that do not match the current feature schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver gave up before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fundusq
