#pragma once

#include <iosfwd>

namespace besovtree::cli {

/// Runs the command line `argv` (argv[0] is the program name) and returns the exit code:
/// 0 success, 1 computation error, 2 usage or I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace besovtree::cli
