#include "fwlab/errors.hpp"

namespace fwlab {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateCriticalPoint: return "DegenerateCriticalPoint";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::TraceDiverged: return "TraceDiverged";
    case ErrorKind::TopologyAmbiguous: return "TopologyAmbiguous";
    case ErrorKind::SeedNotFound: return "SeedNotFound";
    case ErrorKind::PeriodNotClosed: return "PeriodNotClosed";
    case ErrorKind::OrbitHitsB: return "OrbitHitsB";
    case ErrorKind::MaxTimeExceeded: return "MaxTimeExceeded";
    case ErrorKind::RatePositivityViolated: return "RatePositivityViolated";
    case ErrorKind::MismatchedObservables: return "MismatchedObservables";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MissingReport: return "MissingReport";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::MissingReport:
      return 2;
    default:
      return 3;
  }
}

}  // namespace fwlab
