#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nvzeno {

enum class ErrorCode {
  NotHermitian,
  DimensionMismatch,
  TooManyNuclei,
  BadLabel,
  NegativeRabi,
  LengthMismatch,
  NonpositiveSeparation,
  ClusterAmbiguity,
  DegenerateParams,
  WrongSpace,
  NotNormalized,
  StepTooLarge,
  PositivityViolation,
  UnknownExperiment,
  ParseError,
  UnknownKey,
  OutOfRange,
  Io,
};

std::string_view error_name(ErrorCode code) noexcept;

// Config errors map to CLI exit code 2, everything else is numerical (3).
bool is_config_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nvzeno
