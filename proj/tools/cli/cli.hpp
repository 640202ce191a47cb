#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rawsea::cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Parses and runs one subcommand. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rawsea::cli
