#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace camsel::cli {

/// Exit code for an error category; unknown categories map to 70.
int exit_code_for(const std::string& category);

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace camsel::cli
