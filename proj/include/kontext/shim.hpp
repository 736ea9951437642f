// Engine behind the preloadable interception library.
//
// The exported C entry points (see src/shim_preload.cpp) only decide whether
// a call is reentrant and then delegate to an Engine. Keeping the engine a
// plain class lets the same code run in-process for tests and benchmarks.

#pragma once

#include "kontext/context.hpp"
#include "kontext/keydb.hpp"

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include <sys/types.h>

namespace kontext::shim {

inline constexpr std::string_view kEnvSpec = "KONTEXT_SPEC";
inline constexpr std::string_view kEnvState = "KONTEXT_STATE";
inline constexpr std::string_view kEnvTrace = "KONTEXT_TRACE";
inline constexpr std::string_view kEnvStartupMs = "KONTEXT_STARTUP_MS";

/// Spec subtree served to getenv.
inline constexpr std::string_view kGetenvRoot = "getenv";
/// Spec subtree of shadowed files; `open/<path>` keys carry `template=`.
inline constexpr std::string_view kOpenRoot = "open";
inline constexpr std::string_view kTemplateProperty = "template";

using GetenvFn = char* (*)(const char*);

enum class Mode { Active, Passthrough };

struct ShimConfig {
  std::optional<std::string> spec_path;
  std::string state_path;
  std::optional<std::string> trace_path;
  /// Where shadow files go; empty means a fresh private directory under
  /// ${TMPDIR:-/tmp}, created on first use.
  std::string shadow_dir;

  /// Reads KONTEXT_SPEC, KONTEXT_STATE and KONTEXT_TRACE through `env`.
  static ShimConfig from_environment(GetenvFn env);
};

struct Counters {
  std::uint64_t calls = 0;
  std::uint64_t hits = 0;
  std::uint64_t reloads = 0;
  std::uint64_t fallthroughs = 0;
};

class RenderError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Writes `<dir>/<prefix with '/' as '_'>` holding one `name=value` line per
/// key below `prefix` (names relative to it), each value resolved under
/// `ctx`. Keys that resolve to nothing are left out. Returns the file path.
std::string render_shadow_file(const KeySet& spec, const ContextState& ctx, const KeyName& prefix,
                               const std::string& dir);

/// Absolute, lexically normalized form of `path` (no symlink resolution).
std::string canonical_path(std::string_view path);

/// Line-safe encoding for trace fields: `\\`, `\t`, `\n` and `\r` escaped.
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

class Engine {
public:
  Engine(ShimConfig config, GetenvFn real_getenv);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  ~Engine();

  /// The value the host should see for `name`. Managed answers point into
  /// storage that is never freed while the engine lives.
  const char* getenv(const char* name);

  /// For a managed, read-only open of `path`, the shadow file to open instead.
  std::optional<std::string> open_redirect(const char* path, bool read_only);

  /// Initializes on first use; further calls are no-ops.
  void ensure_initialized();

  /// Re-reads the layer state if the state file changed and carries a newer
  /// generation. Returns true if the context was reloaded.
  bool refresh_if_stale();

  Mode mode();
  Counters counters() const;
  ContextState context();
  const KeySet& spec() const noexcept { return spec_; }
  const ShimConfig& config() const noexcept { return config_; }

  /// Appends the counters as a trace record (no-op without a trace path).
  void trace_counters();

  /// Removes the private shadow directory if this engine created it.
  void remove_shadow_dir();

  // Serializes all engine state; exposed for fork handlers.
  void lock() { mutex_.lock(); }
  void unlock() { mutex_.unlock(); }

private:
  struct Answer {
    std::uint64_t generation;
    const char* text;
  };
  struct FileSignature {
    dev_t dev = 0;
    ino_t ino = 0;
    off_t size = 0;
    std::int64_t mtime_ns = 0;
    friend bool operator==(const FileSignature&, const FileSignature&) = default;
  };

  void initialize_locked();
  bool refresh_locked();
  const char* retain(const std::string& value, const char* previous);
  void trace(std::string_view record);
  std::string shadow_dir_locked();

  ShimConfig config_;
  GetenvFn real_getenv_;

  std::mutex mutex_;
  std::atomic<bool> initialized_{false};
  Mode mode_ = Mode::Passthrough;

  KeySet spec_;
  std::unordered_map<std::string, KeyName> open_map_;
  ContextState ctx_;
  std::optional<FileSignature> state_signature_;
  bool state_problem_reported_ = false;

  std::unordered_map<std::string, Answer> answers_;
  std::deque<std::string> retired_;
  std::map<KeyName, std::pair<std::uint64_t, std::string>> shadows_;
  std::string shadow_dir_;
  bool owns_shadow_dir_ = false;

  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> reloads_{0};
  std::atomic<std::uint64_t> fallthroughs_{0};

  int trace_fd_ = -1;
};

/// CLOCK_MONOTONIC in nanoseconds; the time base of trace records.
std::int64_t monotonic_ns() noexcept;

}  // namespace kontext::shim
