#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace modhtan {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime, I/O or stall
inline constexpr int kExitUsage = 2;

/**
 * Entry point for the `modhtan` tool. `args` excludes the program name.
 * Subcommands: curves, approx-bench, train, bench.
 */
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace modhtan
