#pragma once

#include <stdexcept>
#include <string>

namespace fairfuse {

// Input/validation failures. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical/solver failures. The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedTemplate : ValidationError {
  using ValidationError::ValidationError;
};

struct LengthMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct MissingTruth : ValidationError {
  using ValidationError::ValidationError;
};

struct MissingRecordedScore : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyAfterFilter : ValidationError {
  using ValidationError::ValidationError;
};

struct DatasetTooSmall : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyGroup : ValidationError {
  using ValidationError::ValidationError;
};

struct InconsistentK : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyBudgetSet : ValidationError {
  using ValidationError::ValidationError;
};

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct SingularSystem : NumericError {
  using NumericError::NumericError;
};

struct NonFinite : NumericError {
  using NumericError::NumericError;
};

}  // namespace fairfuse
