#pragma once

#include <iosfwd>

namespace langevin {

/// Exit codes: 0 verdict pass, 1 verdict fail (or divergence), 2 bad
/// config/input/usage.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace langevin
