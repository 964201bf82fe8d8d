#pragma once

#include <iosfwd>

namespace leafctl::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;   // bad flags, invalid plan, infeasible target
inline constexpr int kDataError = 3;     // unparsable or degenerate input data
inline constexpr int kRuntimeError = 4;  // IO, port in use

/// Entry point of the `leafctl` tool with injectable streams, so that
/// interactive commands can be scripted from tests.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace leafctl::cli
