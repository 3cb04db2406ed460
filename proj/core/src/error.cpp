#include "hypkob/error.hpp"

namespace hypkob {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::CurvatureEstimateFailed: return "CurvatureEstimateFailed";
    case ErrorCode::OutsideShellRange: return "OutsideShellRange";
    case ErrorCode::DerivativeEvaluationFailed: return "DerivativeEvaluationFailed";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::DegenerateContact: return "DegenerateContact";
    case ErrorCode::GraphDisconnected: return "GraphDisconnected";
    case ErrorCode::ContactUnavailable: return "ContactUnavailable";
    case ErrorCode::ImageOffBoundary: return "ImageOffBoundary";
    case ErrorCode::RefinementStalled: return "RefinementStalled";
    case ErrorCode::ProjectionsDiffer: return "ProjectionsDiffer";
    case ErrorCode::HeightsDiffer: return "HeightsDiffer";
    case ErrorCode::PointOutsideShellRegion: return "PointOutsideShellRegion";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::PrefixTooShort: return "PrefixTooShort";
    case ErrorCode::NotStabilized: return "NotStabilized";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::MapEscapedDomain: return "MapEscapedDomain";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hypkob
