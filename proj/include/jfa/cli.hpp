#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jfa::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

// Runs one command line (args[0] is the program name). Normal output goes to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jfa::cli
