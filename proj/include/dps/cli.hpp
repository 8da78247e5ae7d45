#pragma once

#include <iosfwd>

namespace dps {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

/// Entry point of the `dps` tool. Subcommands:
///   pretrain --env --config --out --seed
///   finetune --config --in --out [--reward-mode] [--workers] [--seed] [--history]
///   eval     --in --env --trials --seed --out [--dim] [--workers]
///   compare  --baseline --tuned [--json]
///   dim      --trace --base --ratio --scales
///   trace    --in --env --seed --out
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dps
