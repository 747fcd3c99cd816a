#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace joco::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitRunFailed = 1,
  kExitBadName = 2,
  kExitBadInput = 3,
};

/// The `joco` command line: run, aggregate, plot and ablate subcommands.
/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace joco::harness
