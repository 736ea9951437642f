#include "kontext/process.hpp"

#include <cerrno>
#include <cstring>
#include <utility>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace kontext {

namespace {

void close_fd(int& fd) noexcept {
  if (fd >= 0)
    ::close(fd);
  fd = -1;
}

struct Pipe {
  int read = -1;
  int write = -1;
  ~Pipe() {
    close_fd(read);
    close_fd(write);
  }
  void open() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0)
      throw ExecFailed(std::string("pipe failed: ") + std::strerror(errno));
    read = fds[0];
    write = fds[1];
  }
};

}  // namespace

std::vector<std::string> merged_environment(
    const std::map<std::string, std::optional<std::string>>& overrides) {
  std::vector<std::string> out;
  for (char** entry = environ; entry && *entry; ++entry) {
    const std::string_view var(*entry);
    const auto name = std::string(var.substr(0, var.find('=')));
    if (overrides.count(name))
      continue;
    out.emplace_back(var);
  }
  for (const auto& [name, value] : overrides) {
    if (value)
      out.push_back(name + "=" + *value);
  }
  return out;
}

Child::Child(Child&& other) noexcept
    : pid_(std::exchange(other.pid_, -1)),
      in_(std::exchange(other.in_, -1)),
      out_(std::exchange(other.out_, -1)),
      err_(std::exchange(other.err_, -1)),
      exit_status_(other.exit_status_) {}

Child& Child::operator=(Child&& other) noexcept {
  if (this != &other) {
    close_fd(in_);
    close_fd(out_);
    close_fd(err_);
    pid_ = std::exchange(other.pid_, -1);
    in_ = std::exchange(other.in_, -1);
    out_ = std::exchange(other.out_, -1);
    err_ = std::exchange(other.err_, -1);
    exit_status_ = other.exit_status_;
  }
  return *this;
}

Child::~Child() {
  close_fd(in_);
  close_fd(out_);
  close_fd(err_);
}

void Child::close_stdin() { close_fd(in_); }

int Child::wait() {
  close_fd(in_);
  if (pid_ < 0)
    return exit_status_;
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0) {
    if (errno != EINTR)
      throw ExecFailed(std::string("waitpid failed: ") + std::strerror(errno));
  }
  pid_ = -1;
  if (WIFEXITED(status))
    exit_status_ = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    exit_status_ = 128 + WTERMSIG(status);
  else
    exit_status_ = 255;
  return exit_status_;
}

Child spawn(const LaunchSpec& spec) {
  Pipe in, out, err;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  struct ActionsGuard {
    posix_spawn_file_actions_t* a;
    ~ActionsGuard() { posix_spawn_file_actions_destroy(a); }
  } actions_guard{&actions};

  if (spec.pipe_stdin) {
    in.open();
    posix_spawn_file_actions_adddup2(&actions, in.read, STDIN_FILENO);
  }
  if (spec.pipe_stdout) {
    out.open();
    posix_spawn_file_actions_adddup2(&actions, out.write, STDOUT_FILENO);
  }
  if (spec.pipe_stderr) {
    err.open();
    posix_spawn_file_actions_adddup2(&actions, err.write, STDERR_FILENO);
  }

  std::vector<std::string> argv_storage;
  argv_storage.push_back(spec.program);
  argv_storage.insert(argv_storage.end(), spec.args.begin(), spec.args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage)
    argv.push_back(a.data());
  argv.push_back(nullptr);

  auto env_storage = merged_environment(spec.env);
  std::vector<char*> envp;
  for (auto& e : env_storage)
    envp.push_back(e.data());
  envp.push_back(nullptr);

  Child child;
  const int rc =
      ::posix_spawnp(&child.pid_, spec.program.c_str(), &actions, nullptr, argv.data(), envp.data());
  if (rc != 0) {
    child.pid_ = -1;
    throw ExecFailed("cannot execute '" + spec.program + "': " + std::strerror(rc));
  }
  if (spec.pipe_stdin)
    child.in_ = std::exchange(in.write, -1);
  if (spec.pipe_stdout)
    child.out_ = std::exchange(out.read, -1);
  if (spec.pipe_stderr)
    child.err_ = std::exchange(err.read, -1);
  return child;
}

int run_and_wait(const LaunchSpec& spec) { return spawn(spec).wait(); }

}  // namespace kontext
