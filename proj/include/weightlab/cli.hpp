#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace weightlab {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitFlagged = 3 };

/// Parses argv (argv[0] is the program name) and runs one subcommand:
/// weight, norm, apply, czd, probe, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat key -> value map from a key=value file with optional [section] headers. A key
/// repeated in two sections is a configuration error.
std::map<std::string, std::string> read_flat_config(const std::string& path);

}  // namespace weightlab
