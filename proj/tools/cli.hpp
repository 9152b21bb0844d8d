#pragma once

#include <ostream>

namespace ustat::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitThresholds = 3;
inline constexpr int kExitBudget = 4;

// Runs one command line. Diagnostics go to `err`, dry-run plans and
// verbose progress to `out`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ustat::cli
