#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leafctl {

/// Machine-readable failure categories. The names double as the `code` field
/// of service error responses.
enum class ErrorCode {
  InvalidPlan,
  InfeasibleTarget,
  DegenerateFilter,
  GridTooCoarse,
  NoLeavesRemaining,
  ZeroAlpha,
  LengthMismatch,
  DegenerateRegression,
  InsufficientReplication,
  InvalidDataset,
  ParseError,
  SessionComplete,
  EmptyMeasurement,
  UnknownSession,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace leafctl
