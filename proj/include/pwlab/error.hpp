#pragma once

#include <stdexcept>
#include <string>

namespace pwlab {

enum class ErrorKind {
  InvalidCase,
  OutOfRange,
  DegenerateRoots,
  BoundaryDegeneracy,
  UndefinedAtZeroJ,
  PhaseBranch,
  NoConvergence,
  OutsideImage,
  LeftDomain,
  SingularM,
  ToleranceNotMet,
  PeriodMismatch,
  AliasWarning,
  BlowUp,
  InvalidArgument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidCase: return "InvalidCase";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateRoots: return "DegenerateRoots";
    case ErrorKind::BoundaryDegeneracy: return "BoundaryDegeneracy";
    case ErrorKind::UndefinedAtZeroJ: return "UndefinedAtZeroJ";
    case ErrorKind::PhaseBranch: return "PhaseBranch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OutsideImage: return "OutsideImage";
    case ErrorKind::LeftDomain: return "LeftDomain";
    case ErrorKind::SingularM: return "SingularM";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::PeriodMismatch: return "PeriodMismatch";
    case ErrorKind::AliasWarning: return "AliasWarning";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pwlab
