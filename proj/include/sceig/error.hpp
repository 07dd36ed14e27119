#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sceig {

enum class ErrorKind {
  ParameterDimension,
  DecayViolation,
  InvalidFamily,
  Conditioning,
  IterationLimit,
  Residual,
  Rank,
  NotProvablyIsolated,
  ClusterCoverage,
  DegenerateBasis,
  ClusterCrossingExterior,
  Weight,
  Precondition,
  Domain,
  Parameter,
  SampleFailures,
  Io,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sceig
