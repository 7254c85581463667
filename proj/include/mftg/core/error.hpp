#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mftg {

enum class Errc {
  InvalidArgument,
  NonFinite,
  DelayNotOnGrid,
  NoBracket,
  SingularStep,
  DegenerateSupport,
  GridTooCoarse,
  NonpositiveCostate,
  OutOfRange,
  MonotonicityViolation,
  AlphaOutOfRange,
  InfeasibleSharing,
  NegativeSlope,
  VertexSample,
  ZeroDenominator,
  ConfigInvalid,
  ScenarioFailed,
  IoError,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DelayNotOnGrid: return "DelayNotOnGrid";
    case Errc::NoBracket: return "NoBracket";
    case Errc::SingularStep: return "SingularStep";
    case Errc::DegenerateSupport: return "DegenerateSupport";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::NonpositiveCostate: return "NonpositiveCostate";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::MonotonicityViolation: return "MonotonicityViolation";
    case Errc::AlphaOutOfRange: return "AlphaOutOfRange";
    case Errc::InfeasibleSharing: return "InfeasibleSharing";
    case Errc::NegativeSlope: return "NegativeSlope";
    case Errc::VertexSample: return "VertexSample";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::ScenarioFailed: return "ScenarioFailed";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every solver failure is reported as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace mftg
