#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace santalo {

enum class ErrorCode {
  InvalidArgument,
  ZeroMass,
  NotBracketed,
  EmptySupport,
  DegenerateSplit,
  NoIntersection,
  InterpolationOutOfBox,
  PremiseViolated,
  Unbounded,
  CentroidNotInterior,
  BoxTooSmall,
  Io,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::NotBracketed: return "NotBracketed";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::InterpolationOutOfBox: return "InterpolationOutOfBox";
    case ErrorCode::PremiseViolated: return "PremiseViolated";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::CentroidNotInterior: return "CentroidNotInterior";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// batch drivers can record it in a report instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace santalo
