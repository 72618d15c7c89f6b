#include "thermobeam/errors.hpp"

namespace thermobeam {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorKind::NonPositiveKernel: return "NonPositiveKernel";
    case ErrorKind::IncreasingKernel: return "IncreasingKernel";
    case ErrorKind::InfiniteMass: return "InfiniteMass";
    case ErrorKind::NoExponentialDomination: return "NoExponentialDomination";
    case ErrorKind::IncompatibleBoundary: return "IncompatibleBoundary";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::TruncationUnreachable: return "TruncationUnreachable";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::InconsistentGrid: return "InconsistentGrid";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DefectiveSpectrum: return "DefectiveSpectrum";
    case ErrorKind::EigensolveFailed: return "EigensolveFailed";
    case ErrorKind::SingularResolvent: return "SingularResolvent";
    case ErrorKind::InfeasibleMultipliers: return "InfeasibleMultipliers";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::EnergyUnderflow: return "EnergyUnderflow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {
std::string compose(ErrorKind kind, const std::string& subject, const std::string& message) {
  std::string out(to_string(kind));
  if (!subject.empty()) out += "(" + subject + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::string subject, const std::string& message)
    : std::runtime_error(compose(kind, subject, message)), kind_(kind), subject_(std::move(subject)), message_(message) {}

}  // namespace thermobeam
