#pragma once

#include <iosfwd>

namespace spheresync {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one subcommand: simulate, sweep, verify, reduce-n3, align, hopf,
/// catalog. Returns 0 on success, 1 on validation or numerical failure
/// (including usage errors), 2 on IO errors.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace spheresync
