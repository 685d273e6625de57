#pragma once

#include <string>
#include <vector>

namespace blurbench {

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
};

/// Runs argv directly (no shell), waits up to timeout_s of wall-clock time,
/// then kills the child. timeout_s <= 0 means no limit. quiet_stdout sends
/// the child's stdout to /dev/null (stderr always passes through).
CommandResult run_command(const std::vector<std::string>& argv, double timeout_s,
                          bool quiet_stdout = false);

/// Splits a command template on whitespace into argv tokens.
std::vector<std::string> split_command(const std::string& command);

}  // namespace blurbench
