#include "deltailc/errors.hpp"

namespace deltailc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnreachablePose: return "UnreachablePose";
    case ErrorKind::SingularConfiguration: return "SingularConfiguration";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::EmptyWorkspace: return "EmptyWorkspace";
    case ErrorKind::SingularMass: return "SingularMass";
    case ErrorKind::RankDeficiency: return "RankDeficiency";
    case ErrorKind::IndefiniteMass: return "IndefiniteMass";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::BarrierViolation: return "BarrierViolation";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ImpulseAliasing: return "ImpulseAliasing";
    case ErrorKind::EmptyWeighting: return "EmptyWeighting";
    case ErrorKind::NumericalDivergence: return "NumericalDivergence";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace deltailc
