#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// MPKRYLOV_DEFAULT_PREC when set and valid, else 512.
long default_precision_bits();

}  // namespace mpk::cli
