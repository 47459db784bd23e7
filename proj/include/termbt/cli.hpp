#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "termbt/error.hpp"

namespace termbt::cli {

/// Exit code for an error: 2 for bad input (config, paths, missing keys or
/// files), 1 otherwise.
int exit_code_for(ErrorCode code);

/// Runs one command. `args` excludes the program name. Errors are printed to
/// `err` as a single "error[E_CODE]: message" line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace termbt::cli
