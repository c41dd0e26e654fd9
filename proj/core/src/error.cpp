#include "optocool/error.hpp"

namespace optocool {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NoStableBranch: return "NoStableBranch";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::SingularResponse: return "SingularResponse";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::ImaginaryFrequency: return "ImaginaryFrequency";
    case ErrorKind::InvalidRegime: return "InvalidRegime";
    case ErrorKind::OptimizationFailure: return "OptimizationFailure";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace optocool
