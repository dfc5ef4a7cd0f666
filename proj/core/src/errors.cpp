#include "vnrecur/errors.hpp"

namespace vnrecur {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotProjection: return "NotProjection";
    case ErrorCode::NotFaithful: return "NotFaithful";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotMeasurePreserving: return "NotMeasurePreserving";
    case ErrorCode::NullSet: return "NullSet";
    case ErrorCode::ContractivityViolated: return "ContractivityViolated";
    case ErrorCode::NotFactor: return "NotFactor";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::CenterFails: return "CenterFails";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorCode::NotAState: return "NotAState";
    case ErrorCode::SubInvarianceViolated: return "SubInvarianceViolated";
    case ErrorCode::NullSpaceLeak: return "NullSpaceLeak";
    case ErrorCode::NMaxExceeded: return "NMaxExceeded";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
  }
  return "Unknown";
}

}  // namespace vnrecur
