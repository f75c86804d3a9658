#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace romfcc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the command line (without the program name). Data and progress go to
/// out, diagnostics to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace romfcc::cli
