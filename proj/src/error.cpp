#include "warpmass/error.hpp"

namespace warpmass {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::NonPositiveWarp: return "NonPositiveWarp";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NonConstantScal: return "NonConstantScal";
    case ErrorKind::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorKind::TruncationExceeded: return "TruncationExceeded";
    case ErrorKind::ModeSelectionViolation: return "ModeSelectionViolation";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ZeroNormOnWindow: return "ZeroNormOnWindow";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::InvalidFactorDimension: return "InvalidFactorDimension";
    case ErrorKind::MatchingFailure: return "MatchingFailure";
    case ErrorKind::TruncationError: return "TruncationError";
    case ErrorKind::ShellTooCoarse: return "ShellTooCoarse";
    case ErrorKind::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::UnsupportedNonRadial: return "UnsupportedNonRadial";
    case ErrorKind::MassNotPositive: return "MassNotPositive";
    case ErrorKind::GluingMismatch: return "GluingMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::InvalidFactorization: return "InvalidFactorization";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace warpmass
