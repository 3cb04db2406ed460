#pragma once

#include <stdexcept>
#include <string>

namespace hypkob {

enum class ErrorCode {
  PointOutsideDomain,
  ProjectionDiverged,
  CurvatureEstimateFailed,
  OutsideShellRange,
  DerivativeEvaluationFailed,
  DimensionTooSmall,
  DegenerateContact,
  GraphDisconnected,
  ContactUnavailable,
  ImageOffBoundary,
  RefinementStalled,
  ProjectionsDiffer,
  HeightsDiffer,
  PointOutsideShellRegion,
  ZeroVector,
  PrefixTooShort,
  NotStabilized,
  PreconditionViolated,
  MapEscapedDomain,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code; every library failure uses it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hypkob
