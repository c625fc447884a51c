#pragma once

#include <stdexcept>
#include <string>

namespace ddswarm {

enum class ErrorCode {
  NonPositiveScale,
  ScaleSeparationViolated,
  InvalidConfig,
  PositionOutOfDomain,
  PairNotOpposite,
  PairTooFar,
  NegativeDensity,
  CalibrationDiverged,
  GridMismatch,
  UnstableStep,
  LinearSolveFailed,
  NormDrift,
  NodeCell,
  NodeCrossing,
  ScenarioGridMismatch,
  Io,
};

const char* to_string(ErrorCode code);

// Validation errors map to CLI exit code 2, everything else to 3.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ddswarm
