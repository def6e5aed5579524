#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mibids::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kTransportError = 3 };

/// Runs the command line (argv[0] is the program name). All output goes to
/// `out` and `err`; nothing calls std::exit.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with arguments that exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mibids::cli
