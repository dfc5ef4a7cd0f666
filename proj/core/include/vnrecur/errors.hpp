#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vnrecur {

enum class ErrorCode {
  InvalidArgument,
  NotSquare,
  NotHermitian,
  NoConvergence,
  ShapeMismatch,
  NotProjection,
  NotFaithful,
  HypothesisFailed,
  ZeroProbability,
  LengthMismatch,
  NotMeasurePreserving,
  NullSet,
  ContractivityViolated,
  NotFactor,
  SearchExhausted,
  CenterFails,
  WindowTooNarrow,
  NotAState,
  SubInvarianceViolated,
  NullSpaceLeak,
  NMaxExceeded,
  InvariantViolated,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this exception type; callers
// branch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vnrecur
