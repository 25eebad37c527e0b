#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zdl {

enum class ErrorKind {
  NonZeroMean,
  GridTooCoarse,
  NotSingleWell,
  MinNotAtOrigin,
  DegenerateInflection,
  QuadratureFailure,
  QuadratureBudgetExceeded,
  RangeError,
  TruncationTooSmall,
  EigenSolverFailure,
  PhaseFixFailure,
  NegativeMu,
  MissingEigenvectors,
  ZeroGapDivision,
  SolveFailure,
  EvenBranchCount,
  RegimeMismatch,
  BracketFailure,
  BlowupDetected,
  ConventionUnvalidated,
  ConfigError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NotSingleWell: return "NotSingleWell";
    case ErrorKind::MinNotAtOrigin: return "MinNotAtOrigin";
    case ErrorKind::DegenerateInflection: return "DegenerateInflection";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorKind::PhaseFixFailure: return "PhaseFixFailure";
    case ErrorKind::NegativeMu: return "NegativeMu";
    case ErrorKind::MissingEigenvectors: return "MissingEigenvectors";
    case ErrorKind::ZeroGapDivision: return "ZeroGapDivision";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::EvenBranchCount: return "EvenBranchCount";
    case ErrorKind::RegimeMismatch: return "RegimeMismatch";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::ConventionUnvalidated: return "ConventionUnvalidated";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Input-validation failures (bad signal, bad profile, bad ranges) as
/// opposed to numerical breakdowns. The CLI maps the former to exit code 2.
inline bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonZeroMean:
    case ErrorKind::GridTooCoarse:
    case ErrorKind::NotSingleWell:
    case ErrorKind::MinNotAtOrigin:
    case ErrorKind::DegenerateInflection:
    case ErrorKind::RangeError:
    case ErrorKind::TruncationTooSmall:
    case ErrorKind::RegimeMismatch:
    case ErrorKind::MissingEigenvectors:
    case ErrorKind::ConfigError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace zdl
