// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <iosfwd>

namespace raretype::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagged = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `raretype` tool. Primary output goes to `out` when no --out
// path is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace raretype::cli
