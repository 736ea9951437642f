#include "kontext/shim.hpp"

#include "kontext/layerstate.hpp"
#include "kontext/specfile.hpp"

#include <cerrno>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <vector>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace kontext::shim {

std::int64_t monotonic_ns() noexcept {
  timespec ts{};
  ::clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<std::int64_t>(ts.tv_sec) * 1'000'000'000 + ts.tv_nsec;
}

ShimConfig ShimConfig::from_environment(GetenvFn env) {
  auto read = [env](std::string_view name) -> std::optional<std::string> {
    const char* value = env(std::string(name).c_str());
    if (!value || !*value)
      return std::nullopt;
    return std::string(value);
  };
  ShimConfig config;
  config.spec_path = read(kEnvSpec);
  config.trace_path = read(kEnvTrace);
  if (auto state = read(kEnvState)) {
    config.state_path = *state;
  } else {
    const auto runtime = read("XDG_RUNTIME_DIR");
    config.state_path = runtime.value_or("/tmp") + "/kontext/state.ks";
  }
  return config;
}

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out += text[i];
      continue;
    }
    switch (text[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += text[i];
    }
  }
  return out;
}

std::string canonical_path(std::string_view path) {
  fs::path p(path);
  if (p.is_relative()) {
    char cwd[4096];
    if (::getcwd(cwd, sizeof cwd))
      p = fs::path(cwd) / p;
  }
  auto normal = p.lexically_normal().string();
  while (normal.size() > 1 && normal.back() == '/')
    normal.pop_back();
  return normal;
}

namespace {

void write_file_atomically(const std::string& path, std::string_view content) {
  const auto temp = path + ".tmp." + std::to_string(::getpid());
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0)
    throw RenderError("cannot create '" + temp + "': " + std::strerror(errno));
  while (!content.empty()) {
    const auto n = ::write(fd, content.data(), content.size());
    if (n < 0 && errno == EINTR)
      continue;
    if (n < 0) {
      const int err = errno;
      ::close(fd);
      ::unlink(temp.c_str());
      throw RenderError("cannot write '" + temp + "': " + std::strerror(err));
    }
    content.remove_prefix(static_cast<std::size_t>(n));
  }
  ::close(fd);
  if (::rename(temp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(temp.c_str());
    throw RenderError("cannot rename '" + temp + "': " + std::strerror(err));
  }
}

}  // namespace

std::string render_shadow_file(const KeySet& spec, const ContextState& ctx, const KeyName& prefix,
                               const std::string& dir) {
  const auto keys = spec.below(prefix);
  if (keys.empty())
    throw RenderError("no keys below '" + prefix.str() + "'");

  std::string content;
  const auto skip = prefix.str().size() + 1;
  for (const auto& key : keys) {
    std::optional<LookupOutcome> outcome;
    try {
      outcome = contextual_lookup(spec, key.name(), ctx);
    } catch (const LookupError& e) {
      throw RenderError(e.what());
    }
    if (!outcome)
      continue;
    content += key.name().str().substr(skip);
    content += '=';
    content += outcome->value;
    content += '\n';
  }

  std::string file = prefix.str();
  for (auto& c : file) {
    if (c == '/')
      c = '_';
  }
  const auto path = dir + "/" + file;
  write_file_atomically(path, content);
  return path;
}

Engine::Engine(ShimConfig config, GetenvFn real_getenv)
    : config_(std::move(config)), real_getenv_(real_getenv) {}

Engine::~Engine() {
  if (trace_fd_ >= 0)
    ::close(trace_fd_);
}

void Engine::trace(std::string_view record) {
  if (trace_fd_ < 0)
    return;
  std::string line = std::to_string(monotonic_ns());
  line += '\t';
  line += record;
  line += '\n';
  // O_APPEND plus one write per record keeps concurrent writers' lines whole.
  (void)!::write(trace_fd_, line.data(), line.size());
}

void Engine::ensure_initialized() {
  if (initialized_.load(std::memory_order_acquire))
    return;
  std::lock_guard lock(mutex_);
  if (initialized_.load(std::memory_order_relaxed))
    return;
  initialize_locked();
  initialized_.store(true, std::memory_order_release);
}

void Engine::initialize_locked() {
  if (config_.trace_path) {
    trace_fd_ = ::open(config_.trace_path->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  }
  if (!config_.spec_path) {
    mode_ = Mode::Passthrough;
    return;
  }

  try {
    auto doc = load_spec(*config_.spec_path);
    spec_ = std::move(doc.keyset);

    for (const auto& key : spec_.below(KeyName::parse(kOpenRoot))) {
      const auto prefix = key.meta(kTemplateProperty);
      if (!prefix)
        continue;
      const auto path = key.name().str().substr(kOpenRoot.size());
      open_map_.insert_or_assign(canonical_path(path), KeyName::parse(*prefix));
    }

    struct stat st{};
    if (::stat(config_.state_path.c_str(), &st) == 0) {
      state_signature_ = FileSignature{st.st_dev, st.st_ino, st.st_size,
                                       st.st_mtim.tv_sec * 1'000'000'000LL + st.st_mtim.tv_nsec};
    }
    ctx_ = state_read(config_.state_path);
    mode_ = Mode::Active;
  } catch (const std::exception& e) {
    spec_ = KeySet{};
    open_map_.clear();
    ctx_ = ContextState{};
    mode_ = Mode::Passthrough;
    trace("init-failed\t" + escape_field(e.what()));
  }
}

bool Engine::refresh_if_stale() {
  ensure_initialized();
  std::lock_guard lock(mutex_);
  return mode_ == Mode::Active && refresh_locked();
}

bool Engine::refresh_locked() {
  struct stat st{};
  if (::stat(config_.state_path.c_str(), &st) != 0) {
    if (!state_problem_reported_) {
      state_problem_reported_ = true;
      trace("state-error\t" + escape_field(config_.state_path) + "\t" +
            escape_field(std::strerror(errno)));
    }
    return false;
  }
  const FileSignature signature{st.st_dev, st.st_ino, st.st_size,
                                st.st_mtim.tv_sec * 1'000'000'000LL + st.st_mtim.tv_nsec};
  if (state_signature_ == signature)
    return false;
  state_signature_ = signature;

  try {
    auto next = state_read(config_.state_path);
    state_problem_reported_ = false;
    if (next.generation() <= ctx_.generation())
      return false;
    ctx_ = std::move(next);
    reloads_.fetch_add(1, std::memory_order_relaxed);
    return true;
  } catch (const std::exception& e) {
    trace("state-error\t" + escape_field(config_.state_path) + "\t" + escape_field(e.what()));
    return false;
  }
}

const char* Engine::retain(const std::string& value, const char* previous) {
  if (previous && value == previous)
    return previous;
  // Superseded answers stay in place; the host may still hold them.
  retired_.push_back(value);
  return retired_.back().c_str();
}

const char* Engine::getenv(const char* name) {
  ensure_initialized();
  calls_.fetch_add(1, std::memory_order_relaxed);

  const char* result = nullptr;
  bool served = false;
  std::string lookup_error;

  if (mode_ == Mode::Active && name && KeyName::valid_segment(name)) {
    std::string key = std::string(kGetenvRoot) + "/" + name;
    if (spec_.get(std::string_view(key))) {
      std::lock_guard lock(mutex_);
      refresh_locked();
      auto& answer = answers_[name];
      if (answer.text && answer.generation == ctx_.generation()) {
        result = answer.text;
        served = true;
      } else {
        try {
          if (auto outcome = contextual_lookup(spec_, KeyName::parse(key), ctx_)) {
            result = retain(outcome->value, answer.text);
            answer = Answer{ctx_.generation(), result};
            served = true;
          }
        } catch (const std::exception& e) {
          lookup_error = e.what();
        }
      }
    }
  }

  if (!lookup_error.empty())
    trace("lookup-error\t" + escape_field(name) + "\t" + escape_field(lookup_error));

  if (served) {
    hits_.fetch_add(1, std::memory_order_relaxed);
  } else {
    result = real_getenv_(name);
    fallthroughs_.fetch_add(1, std::memory_order_relaxed);
  }

  if (trace_fd_ >= 0 && name) {
    std::string record = "getenv\t";
    record += escape_field(name);
    record += served ? "\thit\t" : (result ? "\tfallthrough\t" : "\tnull\t");
    if (result)
      record += escape_field(result);
    trace(record);
  }
  return result;
}

std::string Engine::shadow_dir_locked() {
  if (!shadow_dir_.empty())
    return shadow_dir_;
  if (!config_.shadow_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config_.shadow_dir, ec);
    if (ec)
      throw RenderError("cannot create '" + config_.shadow_dir + "': " + ec.message());
    shadow_dir_ = config_.shadow_dir;
    return shadow_dir_;
  }
  const char* tmp = real_getenv_("TMPDIR");
  std::string pattern = std::string(tmp && *tmp ? tmp : "/tmp") + "/kontext-shadow-" +
                        std::to_string(::getpid()) + "-XXXXXX";
  std::vector<char> buffer(pattern.begin(), pattern.end());
  buffer.push_back('\0');
  if (!::mkdtemp(buffer.data()))
    throw RenderError("cannot create shadow directory: " + std::string(std::strerror(errno)));
  shadow_dir_ = buffer.data();
  owns_shadow_dir_ = true;
  return shadow_dir_;
}

std::optional<std::string> Engine::open_redirect(const char* path, bool read_only) {
  ensure_initialized();
  if (mode_ != Mode::Active || open_map_.empty() || !read_only || !path)
    return std::nullopt;
  const auto canonical = canonical_path(path);
  const auto it = open_map_.find(canonical);
  if (it == open_map_.end())
    return std::nullopt;

  std::string shadow;
  std::string failure;
  {
    std::lock_guard lock(mutex_);
    refresh_locked();
    auto& entry = shadows_[it->second];
    if (entry.second.empty() || entry.first != ctx_.generation()) {
      try {
        entry = {ctx_.generation(), render_shadow_file(spec_, ctx_, it->second, shadow_dir_locked())};
      } catch (const std::exception& e) {
        entry = {};
        failure = e.what();
      }
    }
    shadow = entry.second;
  }

  if (!failure.empty()) {
    trace("open\t" + escape_field(canonical) + "\terror\t" + escape_field(failure));
    return std::nullopt;
  }
  trace("open\t" + escape_field(canonical) + "\tshadow\t" + escape_field(shadow));
  return shadow;
}

Mode Engine::mode() {
  ensure_initialized();
  return mode_;
}

Counters Engine::counters() const {
  return Counters{calls_.load(), hits_.load(), reloads_.load(), fallthroughs_.load()};
}

ContextState Engine::context() {
  ensure_initialized();
  std::lock_guard lock(mutex_);
  return ctx_;
}

void Engine::trace_counters() {
  if (trace_fd_ < 0)
    return;
  const auto c = counters();
  trace("counters\tcalls=" + std::to_string(c.calls) + "\thits=" + std::to_string(c.hits) +
        "\treloads=" + std::to_string(c.reloads) + "\tfallthroughs=" + std::to_string(c.fallthroughs));
}

void Engine::remove_shadow_dir() {
  std::lock_guard lock(mutex_);
  if (!owns_shadow_dir_)
    return;
  std::error_code ec;
  fs::remove_all(shadow_dir_, ec);
  owns_shadow_dir_ = false;
  shadow_dir_.clear();
  shadows_.clear();
}

}  // namespace kontext::shim
