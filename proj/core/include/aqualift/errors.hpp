#pragma once

#include <stdexcept>
#include <string>

namespace aqualift {

/// Base class for all aqualift runtime failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input the user can fix: bad file, bad field, inconsistent config.
struct ValidationError : Error {
  using Error::Error;
};

/// File could not be parsed at all (malformed JSON/CSV/binary header).
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

/// Numerical failure while evaluating a model.
struct NumericalError : Error {
  using Error::Error;
};

struct NonSkew : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularMassMatrix : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularInertia : NumericalError {
  using NumericalError::NumericalError;
};

struct RankDeficientAllocation : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateThrust : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateKnots : ValidationError {
  using ValidationError::ValidationError;
};

struct CapExceeded : ValidationError {
  using ValidationError::ValidationError;
};

struct MassBelowEmpty : NumericalError {
  using NumericalError::NumericalError;
};

struct HypothesisUnmet : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace aqualift
