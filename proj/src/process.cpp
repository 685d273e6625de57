#include "blurbench/process.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "blurbench/error.hpp"

namespace blurbench {

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> tokens;
  std::string token;
  while (in >> token) {
    tokens.push_back(token);
  }
  return tokens;
}

CommandResult run_command(const std::vector<std::string>& argv, double timeout_s,
                          bool quiet_stdout) {
  if (argv.empty()) {
    raise(Errc::BadArgument, "empty command");
  }
  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) {
    args.push_back(const_cast<char*>(a.c_str()));
  }
  args.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) {
    raise(Errc::Io, "fork failed");
  }
  if (pid == 0) {
    if (quiet_stdout) {
      const int null_fd = open("/dev/null", O_WRONLY);
      if (null_fd >= 0) {
        dup2(null_fd, STDOUT_FILENO);
        close(null_fd);
      }
    }
    execvp(args[0], args.data());
    _exit(127);
  }

  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double>(timeout_s));
  int status = 0;
  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) {
      break;
    }
    if (done < 0) {
      raise(Errc::Io, "waitpid failed");
    }
    if (timeout_s > 0.0 && clock::now() >= deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      return {-1, true};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }

  CommandResult result;
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  return result;
}

}  // namespace blurbench
