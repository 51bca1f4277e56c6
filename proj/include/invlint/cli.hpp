#pragma once

namespace invlint {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Parses and runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv);

} // namespace invlint
