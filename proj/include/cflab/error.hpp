#pragma once

#include <stdexcept>
#include <string>

namespace cflab {

enum class ErrorKind {
  RepresentationMismatch,
  UnknownSubsystem,
  DuplicateSubsystem,
  DimensionError,
  EmptyKeepSet,
  InvalidState,
  InvalidOperator,
  UnknownOutcome,
  NoDecisiveEvents,
  InvalidEpsilon,
  InvalidParameter,
  VisibilityOrderError,
  DegenerateCalibration,
  ABLUndefined,
  PostselectionImpossible,
  CoefficientMismatch,
  EnumerationTooLarge,
  EmptySupport,
  NumericalValidation,
  ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type; `kind()` carries the
// machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cflab
