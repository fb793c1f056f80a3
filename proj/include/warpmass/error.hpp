#pragma once

#include <stdexcept>
#include <string>

namespace warpmass {

enum class ErrorKind {
  InvalidModel,
  InvalidDimension,
  NonPositiveWarp,
  DomainError,
  NonConstantScal,
  InvalidSpectrum,
  TruncationExceeded,
  ModeSelectionViolation,
  StepSizeUnderflow,
  NonFiniteState,
  ZeroNormOnWindow,
  WindowTooSmall,
  DegenerateSpectrum,
  HypothesisViolated,
  InvalidFactorDimension,
  MatchingFailure,
  TruncationError,
  ShellTooCoarse,
  ExtrapolationUnstable,
  QuadratureNotConverged,
  UnsupportedNonRadial,
  MassNotPositive,
  GluingMismatch,
  DimensionMismatch,
  DimensionTooSmall,
  InvalidFactorization,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace warpmass
