// Small process and filesystem helpers for tests.

#pragma once

#include "kontext/process.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <poll.h>
#include <unistd.h>

namespace kontext::testing {

// A child that exits early must not kill the test through SIGPIPE.
inline const bool kSigpipeIgnored = [] {
  std::signal(SIGPIPE, SIG_IGN);
  return true;
}();

class TempDir {
public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "kontext-test-XXXXXX").string();
    if (!::mkdtemp(pattern.data()))
      throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out)
    throw std::runtime_error("cannot write " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& name) {
  return std::string(KONTEXT_FIXTURES) + "/" + name;
}

inline std::string drain(int fd) {
  std::string out;
  if (fd < 0)
    return out;
  char buf[4096];
  ssize_t n;
  while ((n = ::read(fd, buf, sizeof buf)) > 0)
    out.append(buf, static_cast<std::size_t>(n));
  return out;
}

struct Captured {
  int status = -1;
  std::string out;
  std::string err;
};

/// Runs to completion capturing stdout and stderr. Output is read with poll
/// so neither pipe can fill up and block the child.
inline Captured capture(LaunchSpec spec, const std::string& input = {}) {
  spec.pipe_stdout = true;
  spec.pipe_stderr = true;
  spec.pipe_stdin = true;
  Child child = spawn(spec);
  if (!input.empty()) {
    const auto n = ::write(child.stdin_fd(), input.data(), input.size());
    (void)n;
  }
  child.close_stdin();
  Captured c;
  pollfd fds[2] = {{child.stdout_fd(), POLLIN, 0}, {child.stderr_fd(), POLLIN, 0}};
  int open_count = 2;
  char buf[4096];
  while (open_count > 0) {
    if (::poll(fds, 2, -1) < 0)
      break;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR)))
        continue;
      const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n <= 0) {
        fds[i].fd = -1;
        --open_count;
      } else {
        (i == 0 ? c.out : c.err).append(buf, static_cast<std::size_t>(n));
      }
    }
  }
  c.status = child.wait();
  return c;
}

inline Captured run_cli(const std::vector<std::string>& args,
                        std::map<std::string, std::optional<std::string>> env = {}) {
  LaunchSpec spec;
  spec.program = KONTEXT_CLI;
  spec.args = args;
  env.emplace("KONTEXT_SHIM", std::string(KONTEXT_SHIM_LIB));
  spec.env = std::move(env);
  return capture(spec);
}

/// Line-at-a-time conversation with a child over pipes.
class Conversation {
public:
  explicit Conversation(LaunchSpec spec) {
    spec.pipe_stdin = true;
    spec.pipe_stdout = true;
    child_ = spawn(spec);
  }
  ~Conversation() {
    child_.close_stdin();
    child_.wait();
  }

  /// Next output line, or nullopt on EOF or after `timeout_ms`.
  std::optional<std::string> read_line(int timeout_ms = 5000) {
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      pollfd p{child_.stdout_fd(), POLLIN, 0};
      if (::poll(&p, 1, timeout_ms) <= 0)
        return std::nullopt;
      char buf[4096];
      const ssize_t n = ::read(child_.stdout_fd(), buf, sizeof buf);
      if (n <= 0)
        return std::nullopt;
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

  void send(const std::string& line) {
    const std::string text = line + "\n";
    const auto n = ::write(child_.stdin_fd(), text.data(), text.size());
    (void)n;
  }

  std::optional<std::string> ask(const std::string& line) {
    send(line);
    return read_line();
  }

  int finish() {
    child_.close_stdin();
    return child_.wait();
  }

  pid_t pid() const { return child_.pid(); }

private:
  Child child_;
  std::string buffer_;
};

}  // namespace kontext::testing
