#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparcs {

enum class ErrorCode {
  // data errors
  TooFewSamples,
  ZeroVarianceColumn,
  ZeroVarianceResponse,
  DimensionMismatch,
  SupportMismatch,
  InvalidL,
  InvalidK,
  InvalidPhi,
  InvalidDof,
  InvalidParams,
  DomainError,
  ConfigError,
  ParseError,
  IoError,
  // numerical failures
  SingularGram,
  SingularRestrictedCovariance,
  NotPositiveDefinite,
  ConvergenceFailure,
  NonConvergence,
  DegenerateVariance,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of a numerical routine, false for bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sparcs
