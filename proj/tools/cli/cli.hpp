#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amgan::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

// Default directory for outputs when no explicit path is given.
inline constexpr const char* kOutDirEnv = "AMGAN_OUT_DIR";

// args excludes the program name. Usage text and diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amgan::cli
