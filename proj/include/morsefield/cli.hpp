#pragma once

#include <iosfwd>

namespace morsefield {

// Exit codes of the morsefield tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // --strict degeneracy, failed checks, morsify or residual failure
inline constexpr int kExitInput = 2;     // bad flags, unreadable or malformed patch, asymmetric components
inline constexpr int kExitGeometry = 3;  // umbilic, focal point, chart radius, integrator, non-minimal input

/// The whole tool behind `morsefield analyze|perturb|verify|fermi <file>`. The
/// report goes to `out` (or --out); diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace morsefield
