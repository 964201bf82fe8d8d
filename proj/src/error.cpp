#include "leafctl/error.hpp"

namespace leafctl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::DegenerateFilter: return "DegenerateFilter";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NoLeavesRemaining: return "NoLeavesRemaining";
    case ErrorCode::ZeroAlpha: return "ZeroAlpha";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateRegression: return "DegenerateRegression";
    case ErrorCode::InsufficientReplication: return "InsufficientReplication";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SessionComplete: return "SessionComplete";
    case ErrorCode::EmptyMeasurement: return "EmptyMeasurement";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace leafctl
