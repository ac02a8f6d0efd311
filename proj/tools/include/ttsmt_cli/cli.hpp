#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ttsmt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiff = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitBackend = 4;

/// Runs one command. `args` excludes the program name. Failures print a
/// single "ttsmt: error: <class>: <message>" line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttsmt::cli
