#include "sceig/error.hpp"

namespace sceig {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParameterDimension: return "parameter-dimension";
    case ErrorKind::DecayViolation: return "decay-violation";
    case ErrorKind::InvalidFamily: return "invalid-family";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::IterationLimit: return "iteration-limit";
    case ErrorKind::Residual: return "residual";
    case ErrorKind::Rank: return "rank";
    case ErrorKind::NotProvablyIsolated: return "not-provably-isolated";
    case ErrorKind::ClusterCoverage: return "cluster-coverage";
    case ErrorKind::DegenerateBasis: return "degenerate-basis";
    case ErrorKind::ClusterCrossingExterior: return "cluster-crossing-exterior";
    case ErrorKind::Weight: return "weight";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::SampleFailures: return "sample-failures";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace sceig
