#pragma once

#include <stdexcept>
#include <string>

namespace gerbelab {

/// Base of all library errors that are not plain argument/range misuse.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to meet its contract (non-convergence,
/// residual above tolerance, lost convexity, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a mathematical precondition (non-closed form,
/// non-integral class, non-cocycle, ...).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration does not match its schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace gerbelab
