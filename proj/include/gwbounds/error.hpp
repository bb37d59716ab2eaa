#pragma once

#include <stdexcept>
#include <string>

namespace gwbounds {

enum class ErrorKind {
  NonPSDCovariance,
  RhoOutOfRange,
  BadPmf,
  ZeroVariance,
  BadDistortion,
  NonPositiveInput,
  EmptyProfile,
  NegativeDelta,
  DeltaNotBelowVariance,
  UndefinedForDiscrete,
  QuadratureNotConverged,
  NuOutOfRange,
  RegimeViolation,
  NotConverged,
  DeltaInfeasible,
  GridTooCoarse,
  ProfileTooLarge,
  SeedRequired,
  NoFeasiblePointFound,
  BadConfig,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPSDCovariance: return "NonPSDCovariance";
    case ErrorKind::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorKind::BadPmf: return "BadPmf";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::BadDistortion: return "BadDistortion";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::EmptyProfile: return "EmptyProfile";
    case ErrorKind::NegativeDelta: return "NegativeDelta";
    case ErrorKind::DeltaNotBelowVariance: return "DeltaNotBelowVariance";
    case ErrorKind::UndefinedForDiscrete: return "UndefinedForDiscrete";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NuOutOfRange: return "NuOutOfRange";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DeltaInfeasible: return "DeltaInfeasible";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ProfileTooLarge: return "ProfileTooLarge";
    case ErrorKind::SeedRequired: return "SeedRequired";
    case ErrorKind::NoFeasiblePointFound: return "NoFeasiblePointFound";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Structured failure raised by every operation in the library. The kind is
/// stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gwbounds
