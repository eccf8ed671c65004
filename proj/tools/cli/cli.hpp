#pragma once

#include <iosfwd>

namespace refind::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `refind` tool. Writes results to `out` and a single
/// diagnostic line to `err` on failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace refind::cli
