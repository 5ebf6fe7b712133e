#include "sparcs/error.hpp"

namespace sparcs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::ZeroVarianceResponse: return "ZeroVarianceResponse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::InvalidL: return "InvalidL";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidPhi: return "InvalidPhi";
    case ErrorCode::InvalidDof: return "InvalidDof";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::SingularRestrictedCovariance: return "SingularRestrictedCovariance";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularGram:
    case ErrorCode::SingularRestrictedCovariance:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::NonConvergence:
    case ErrorCode::DegenerateVariance:
      return true;
    default:
      return false;
  }
}

}  // namespace sparcs
