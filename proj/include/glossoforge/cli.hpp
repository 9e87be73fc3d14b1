#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glossoforge::cli {

enum ExitCode : int { kSuccess = 0, kDomainError = 1, kUsageError = 2 };

// args excludes the program name. Data goes to `out`, diagnostics (one JSON
// object per error) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Resolves a shipped data file, honouring GLOSSOFORGE_DATA_DIR.
std::string data_path(const std::string& relative);

}  // namespace glossoforge::cli
