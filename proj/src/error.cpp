#include "nvzeno/error.hpp"

namespace nvzeno {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooManyNuclei: return "TooManyNuclei";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::NegativeRabi: return "NegativeRabi";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonpositiveSeparation: return "NonpositiveSeparation";
    case ErrorCode::ClusterAmbiguity: return "ClusterAmbiguity";
    case ErrorCode::DegenerateParams: return "DegenerateParams";
    case ErrorCode::WrongSpace: return "WrongSpace";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownKey:
    case ErrorCode::OutOfRange:
    case ErrorCode::UnknownExperiment:
    case ErrorCode::BadLabel:
    case ErrorCode::LengthMismatch:
    case ErrorCode::TooManyNuclei:
    case ErrorCode::NegativeRabi:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace nvzeno
