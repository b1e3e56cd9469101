#pragma once

#include <stdexcept>
#include <string>

namespace reachplan {

enum class ErrorCode {
  DimensionMismatch,
  EmptySet,
  Unbounded,
  DegenerateHull,
  InvalidArgument,
  SampleOutsideAdmissible,
  EmptyInfoSet,
  NonConsecutiveObservation,
  Config,
};

const char* to_string(ErrorCode code);

/// Single exception type for the toolkit; the code tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SampleOutsideAdmissible: return "SampleOutsideAdmissible";
    case ErrorCode::EmptyInfoSet: return "EmptyInfoSet";
    case ErrorCode::NonConsecutiveObservation: return "NonConsecutiveObservation";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace reachplan
