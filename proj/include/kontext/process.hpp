// Child process launching with environment overrides.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/types.h>

namespace kontext {

class ExecFailed : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LaunchSpec {
  std::string program;
  std::vector<std::string> args;
  /// Variables to set (value) or remove (nullopt) in the inherited environment.
  std::map<std::string, std::optional<std::string>> env;
  bool pipe_stdin = false;
  bool pipe_stdout = false;
  bool pipe_stderr = false;
};

/// A running child. Pipe ends not requested are -1. Closing is up to the
/// owner; the destructor closes whatever is still open but never waits.
class Child {
public:
  Child() = default;
  Child(Child&& other) noexcept;
  Child& operator=(Child&& other) noexcept;
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child();

  pid_t pid() const noexcept { return pid_; }
  int stdin_fd() const noexcept { return in_; }
  int stdout_fd() const noexcept { return out_; }
  int stderr_fd() const noexcept { return err_; }
  void close_stdin();

  /// Waits for exit; returns the exit status, or 128 + signal number. Later
  /// calls return the same status without waiting again.
  int wait();

private:
  friend Child spawn(const LaunchSpec& spec);
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  int err_ = -1;
  int exit_status_ = -1;
};

/// Starts `spec.program` (searched in PATH). Throws ExecFailed if it cannot
/// be executed.
Child spawn(const LaunchSpec& spec);

/// Runs to completion, returning the exit status (see Child::wait).
int run_and_wait(const LaunchSpec& spec);

/// Environment of this process with `overrides` applied, as NAME=VALUE.
std::vector<std::string> merged_environment(
    const std::map<std::string, std::optional<std::string>>& overrides);

}  // namespace kontext
