#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glshrink {

enum class ErrorCode {
  NotSymmetric,
  NotPositiveDefinite,
  NonFinite,
  DimensionMismatch,
  DomainError,
  AlphaOutOfRange,
  SparsityTooMild,
  InvalidCounts,
  WrongVariant,
  QuadratureFailure,
  TableBuildFailure,
  RootBracketFailure,
  InvalidConstants,
  LowEffectiveSampleSize,
  InvalidSpec,
  ParseError,
  RaggedRows,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad user input (CLI exit code 2); the rest are
/// numerical failures (exit code 3).
bool is_config_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glshrink
