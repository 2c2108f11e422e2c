#pragma once

#include <string>
#include <vector>

namespace fiberparc {

/// Runs one batch command. args excludes the program name.
/// Subcommands: generate, train, predict, evaluate (see --help).
/// Returns the process exit code: 0 success, 1 usage error, 2 data or
/// model error. Diagnostics go to stderr; output files are written
/// atomically (temporary + rename).
int run_cli(std::vector<std::string> args);

}  // namespace fiberparc
