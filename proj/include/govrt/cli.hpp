#pragma once

#include <string>
#include <vector>

namespace govrt {

/// exit_code: 0 success, 1 domain error, 2 usage error, 3 storage/integrity error.
struct CommandResult {
  int exit_code = 0;
  std::string output;         // canonical JSON (plus newline) on success
  std::string error_message;  // single line on failure
};

/// Runs one CLI invocation. `args` excludes the program name.
CommandResult dispatch(const std::vector<std::string>& args);

}  // namespace govrt
