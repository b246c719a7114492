#include "glshrink/error.hpp"

namespace glshrink {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::SparsityTooMild: return "SparsityTooMild";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::WrongVariant: return "WrongVariant";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::TableBuildFailure: return "TableBuildFailure";
    case ErrorCode::RootBracketFailure: return "RootBracketFailure";
    case ErrorCode::InvalidConstants: return "InvalidConstants";
    case ErrorCode::LowEffectiveSampleSize: return "LowEffectiveSampleSize";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::QuadratureFailure:
    case ErrorCode::TableBuildFailure:
    case ErrorCode::RootBracketFailure:
    case ErrorCode::LowEffectiveSampleSize:
      return false;
    default:
      return true;
  }
}

}  // namespace glshrink
