#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace hice {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInternalError = 2;

/// Entry point behind the `hice` binary. `args` excludes the program name.
/// Results go to `out`, diagnostics to `err`. Returns 0 on success, 1 on
/// usage/input/validation errors, 2 on internal errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace hice
