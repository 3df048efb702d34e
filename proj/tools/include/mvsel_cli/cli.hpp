#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

// Runs one `mvsel` invocation. `args` excludes the program name. Normal
// output goes to `out`, diagnostics to `err`; the return value is the exit
// code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvsel::cli
