#ifndef ASMC_CLI_HPP
#define ASMC_CLI_HPP

#include <ostream>

namespace asmc {

/// Exit codes: 0 pass, 1 test failure or runtime error, 2 usage error.
/// Errors are reported on `err` as {"error": kind, "message": text}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asmc

#endif  // ASMC_CLI_HPP
