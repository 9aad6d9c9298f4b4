#pragma once

#include <stdexcept>
#include <string>

namespace deltailc {

enum class ErrorKind {
  InvalidArgument,
  UnreachablePose,
  SingularConfiguration,
  NoIntersection,
  SingularJacobian,
  EmptyWorkspace,
  SingularMass,
  RankDeficiency,
  IndefiniteMass,
  DegenerateBasis,
  BarrierViolation,
  GridMismatch,
  ImpulseAliasing,
  EmptyWeighting,
  NumericalDivergence,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the
// CLI exit path) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace deltailc
