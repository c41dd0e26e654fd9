#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optocool {

enum class ErrorKind {
  InvalidParams,
  NoStableBranch,
  SolverFailure,
  SingularResponse,
  QuadratureFailure,
  Unstable,
  ImaginaryFrequency,
  InvalidRegime,
  OptimizationFailure,
  StepSizeUnderflow,
  NonPhysical,
  GridMismatch,
  WindowTooShort,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace optocool
