#pragma once

#include <stdexcept>
#include <string>

namespace contourlab {

enum class ErrorCode {
  InvalidArgument,
  NonIsolatedCritical,
  NoConvergence,
  ProjectionDiverged,
  NotClosed,
  HitCritical,
  DegenerateHessian,
  BasePointMismatch,
  ConnectorOffFiber,
  Resonance,
  NotInS,
  NoReturn,
  SectionTangency,
  AllOrdersVanish,
  IllConditioned,
  NormalEscape,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for every failure raised by the library.
/// The code identifies the failure class; the message carries context.
class ContourError : public std::runtime_error {
 public:
  ContourError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace contourlab
