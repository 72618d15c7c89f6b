#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermobeam {

enum class ErrorKind {
  ParamOutOfRange,
  NonPositiveCoefficient,
  NonPositiveKernel,
  IncreasingKernel,
  InfiniteMass,
  NoExponentialDomination,
  IncompatibleBoundary,
  GridTooCoarse,
  TruncationUnreachable,
  StructureViolation,
  DimensionMismatch,
  LinearSolveFailure,
  InconsistentGrid,
  DimensionTooLarge,
  DefectiveSpectrum,
  EigensolveFailed,
  SingularResolvent,
  InfeasibleMultipliers,
  WindowTooSmall,
  EnergyUnderflow,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `subject()` names the offending
/// field, node or hypothesis when there is one (e.g. "lambda1", "H4").
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string subject, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string subject_;
  std::string message_;
};

}  // namespace thermobeam
