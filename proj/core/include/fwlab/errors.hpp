#pragma once

#include <stdexcept>
#include <string>

namespace fwlab {

enum class ErrorKind {
  DegenerateCriticalPoint,
  NoConvergence,
  TraceDiverged,
  TopologyAmbiguous,
  SeedNotFound,
  PeriodNotClosed,
  OrbitHitsB,
  MaxTimeExceeded,
  RatePositivityViolated,
  MismatchedObservables,
  ConfigInvalid,
  MissingReport,
  PreconditionViolated,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// CLI exit code for an error kind: 2 config, 3 numeric
int exit_code_for(ErrorKind kind);

}  // namespace fwlab
