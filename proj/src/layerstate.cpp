#include "kontext/layerstate.hpp"

#include "kontext/specfile.hpp"

#include <cerrno>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <random>
#include <thread>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace kontext {

namespace {

constexpr std::string_view kGenerationKey = "generation";
constexpr std::string_view kLayerPrefix = "layer/";

std::string errno_text(int err) { return std::strerror(err); }

class FileDescriptor {
public:
  explicit FileDescriptor(int fd = -1) noexcept : fd_(fd) {}
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() {
    if (fd_ >= 0)
      ::close(fd_);
  }
  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }

private:
  int fd_;
};

// Exclusive flock on `<path>.lock`, polled until the deadline.
class StateLock {
public:
  StateLock(const std::string& state_path, std::chrono::milliseconds timeout)
      : fd_(::open((state_path + ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644)) {
    if (fd_.get() < 0)
      throw StateIoError("cannot open lock file '" + state_path + ".lock': " + errno_text(errno));
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (::flock(fd_.get(), LOCK_EX | LOCK_NB) != 0) {
      if (errno != EWOULDBLOCK && errno != EINTR)
        throw StateIoError("cannot lock '" + state_path + ".lock': " + errno_text(errno));
      if (std::chrono::steady_clock::now() >= deadline)
        throw LockTimeout("timed out waiting for lock on '" + state_path + "'");
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
  }
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;
  ~StateLock() { ::flock(fd_.get(), LOCK_UN); }

private:
  FileDescriptor fd_;
};

void write_all(int fd, std::string_view data, const std::string& path) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR)
        continue;
      throw StateIoError("write to '" + path + "' failed: " + errno_text(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string temp_name_for(const std::string& path) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char suffix[17];
  std::snprintf(suffix, sizeof suffix, "%016llx", static_cast<unsigned long long>(rng()));
  return path + ".tmp." + std::to_string(::getpid()) + "." + suffix;
}

// Readers detect changes by stat metadata alone. Clock ticks are coarse and a
// freed inode number can come back, so each snapshot gets an mtime strictly
// later than the one it replaces.
timespec next_mtime(const std::string& path) {
  timespec now{};
  ::clock_gettime(CLOCK_REALTIME, &now);
  struct stat st{};
  if (::stat(path.c_str(), &st) != 0)
    return now;
  timespec bumped = st.st_mtim;
  if (++bumped.tv_nsec == 1'000'000'000) {
    bumped.tv_nsec = 0;
    ++bumped.tv_sec;
  }
  const bool now_later = now.tv_sec > bumped.tv_sec ||
                         (now.tv_sec == bumped.tv_sec && now.tv_nsec > bumped.tv_nsec);
  return now_later ? now : bumped;
}

void replace_atomically(const std::string& path, const std::string& content,
                        const StateWriteOptions& options) {
  const auto temp = temp_name_for(path);
  {
    FileDescriptor fd(::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
    if (fd.get() < 0)
      throw StateIoError("cannot create '" + temp + "': " + errno_text(errno));
    try {
      write_all(fd.get(), content, temp);
      const timespec stamp = next_mtime(path);
      const timespec times[2] = {stamp, stamp};
      if (::futimens(fd.get(), times) != 0)
        throw StateIoError("cannot set time of '" + temp + "': " + errno_text(errno));
      if (::fsync(fd.get()) != 0)
        throw StateIoError("fsync of '" + temp + "' failed: " + errno_text(errno));
    } catch (...) {
      ::unlink(temp.c_str());
      throw;
    }
  }
  try {
    if (options.before_rename)
      options.before_rename(temp);
  } catch (...) {
    ::unlink(temp.c_str());
    throw;
  }
  if (::rename(temp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(temp.c_str());
    throw StateIoError("cannot rename '" + temp + "' to '" + path + "': " + errno_text(err));
  }
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty())
    return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec)
    throw StateIoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

}  // namespace

CorruptState::CorruptState(std::string path, std::size_t line, const std::string& message)
    : std::runtime_error(path + ":" + std::to_string(line) + ": corrupt state: " + message),
      line_(line) {}

std::string default_state_path() {
  const char* runtime = std::getenv("XDG_RUNTIME_DIR");
  const std::string base = runtime && *runtime ? runtime : "/tmp";
  return base + "/kontext/state.ks";
}

ContextState parse_state(std::string_view text, const std::string& source) {
  std::optional<std::uint64_t> generation;
  std::map<std::string, std::string, std::less<>> layers;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    const auto raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const auto line = specfile_detail::strip_line(raw);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw CorruptState(source, line_no, "expected 'name=value'");
    const auto lhs = specfile_detail::trim(line.substr(0, eq));
    const auto rhs = specfile_detail::trim(line.substr(eq + 1));

    if (lhs == kGenerationKey) {
      std::uint64_t value = 0;
      const auto [end, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), value);
      if (ec != std::errc{} || end != rhs.data() + rhs.size() || rhs.empty())
        throw CorruptState(source, line_no, "bad generation '" + std::string(rhs) + "'");
      if (generation)
        throw CorruptState(source, line_no, "repeated generation line");
      generation = value;
    } else if (lhs.starts_with(kLayerPrefix)) {
      const auto name = lhs.substr(kLayerPrefix.size());
      if (!ContextState::valid_layer_name(name) || !ContextState::valid_layer_value(rhs))
        throw CorruptState(source, line_no, "invalid layer '" + std::string(line) + "'");
      if (!layers.emplace(std::string(name), std::string(rhs)).second)
        throw CorruptState(source, line_no, "repeated layer '" + std::string(name) + "'");
    } else {
      throw CorruptState(source, line_no, "unexpected entry '" + std::string(lhs) + "'");
    }
  }
  if (!generation)
    throw CorruptState(source, std::max<std::size_t>(line_no, 1), "missing generation line");
  return ContextState::from(std::move(layers), *generation);
}

std::string serialize_state(const ContextState& state) {
  std::string out;
  out += kGenerationKey;
  out += '=';
  out += std::to_string(state.generation());
  out += '\n';
  for (const auto& [name, value] : state.layers()) {
    out += kLayerPrefix;
    out += name;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

ContextState state_read(const std::string& path) {
  FileDescriptor fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) {
    if (errno == ENOENT)
      return {};
    throw StateIoError("cannot open state file '" + path + "': " + errno_text(errno));
  }
  std::string content;
  char buffer[4096];
  while (true) {
    const auto n = ::read(fd.get(), buffer, sizeof buffer);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      throw StateIoError("cannot read state file '" + path + "': " + errno_text(errno));
    }
    if (n == 0)
      break;
    content.append(buffer, static_cast<std::size_t>(n));
  }
  return parse_state(content, path);
}

std::uint64_t state_write(const std::string& path, const ContextState& state,
                          const StateWriteOptions& options) {
  ensure_parent(path);
  StateLock lock(path, options.lock_timeout);
  const auto current = state_read(path);
  const auto generation = std::max(state.generation(), current.generation() + 1);
  const auto next = ContextState::from(
      std::map<std::string, std::string, std::less<>>(state.layers().begin(), state.layers().end()),
      generation);
  replace_atomically(path, serialize_state(next), options);
  return generation;
}

std::uint64_t state_set_layer(const std::string& path, std::string_view name,
                              std::optional<std::string_view> value,
                              const StateWriteOptions& options) {
  // Validate before taking the lock so a bad argument never touches the file.
  if (value)
    (void)ContextState{}.with_layer(name, *value);

  ensure_parent(path);
  StateLock lock(path, options.lock_timeout);
  const auto current = state_read(path);
  const auto next = value ? current.with_layer(name, *value) : current.without_layer(name);
  replace_atomically(path, serialize_state(next), options);
  return next.generation();
}

std::vector<NotifyResult> notify(const std::vector<pid_t>& pids, std::string_view signal_name) {
  std::string_view bare = signal_name;
  if (bare.starts_with("SIG"))
    bare.remove_prefix(3);
  int signo;
  if (bare == "HUP")
    signo = SIGHUP;
  else if (bare == "USR1")
    signo = SIGUSR1;
  else if (bare == "USR2")
    signo = SIGUSR2;
  else
    throw UnknownSignal("signal '" + std::string(signal_name) + "' is not one of HUP, USR1, USR2");

  std::vector<NotifyResult> results;
  results.reserve(pids.size());
  for (const auto pid : pids) {
    if (pid <= 0) {
      results.push_back({pid, NotifyStatus::NotPermitted});
      continue;
    }
    if (::kill(pid, signo) == 0) {
      results.push_back({pid, NotifyStatus::Sent});
    } else {
      results.push_back({pid, errno == ESRCH ? NotifyStatus::NoSuchProcess : NotifyStatus::NotPermitted});
    }
  }
  return results;
}

std::string_view to_string(NotifyStatus status) noexcept {
  switch (status) {
    case NotifyStatus::Sent: return "sent";
    case NotifyStatus::NoSuchProcess: return "no-such-process";
    case NotifyStatus::NotPermitted: return "not-permitted";
  }
  return "unknown";
}

}  // namespace kontext
