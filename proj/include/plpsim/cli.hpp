// Command-line front end: run, crash-sweep, sweep, gen-trace, verify-trace.
#pragma once

#include <ostream>

namespace plp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitViolation = 2, kExitDeadlock = 3 };

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plp
