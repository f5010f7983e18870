#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tvr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Environment variable naming the default --data directory.
inline constexpr const char* kDataDirEnv = "TVR_DATA_DIR";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvr::cli
