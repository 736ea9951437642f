// Durable layer state shared between context sensors and running programs.
//
// The state file holds
//
//   generation=<n>
//   layer/<name>=<value>
//
// in lexicographic layer order. Writers serialize on an advisory lock on
// `<path>.lock` and replace the file by rename, so readers always see a
// complete snapshot.

#pragma once

#include "kontext/context.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace kontext {

class CorruptState : public std::runtime_error {
public:
  CorruptState(std::string path, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class LockTimeout : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class StateIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// `${XDG_RUNTIME_DIR:-/tmp}/kontext/state.ks`
std::string default_state_path();

/// Parses state file text. `source` is used in error messages only.
ContextState parse_state(std::string_view text, const std::string& source = "<state>");
std::string serialize_state(const ContextState& state);

/// Reads a snapshot; a missing file is the empty state at generation 0.
ContextState state_read(const std::string& path);

struct StateWriteOptions {
  std::chrono::milliseconds lock_timeout{2000};
  /// Invoked after the temporary file is complete and before it is renamed
  /// into place. Throwing from it abandons the write.
  std::function<void(const std::string& temp_path)> before_rename;
};

/// Sets (or, with nullopt, removes) a layer under the lock and returns the
/// new, strictly larger generation.
std::uint64_t state_set_layer(const std::string& path, std::string_view name,
                              std::optional<std::string_view> value,
                              const StateWriteOptions& options = {});

/// Replaces the whole snapshot under the lock. The stored generation is
/// max(state.generation(), current + 1).
std::uint64_t state_write(const std::string& path, const ContextState& state,
                          const StateWriteOptions& options = {});

enum class NotifyStatus { Sent, NoSuchProcess, NotPermitted };

struct NotifyResult {
  pid_t pid;
  NotifyStatus status;
};

class UnknownSignal : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Sends HUP, USR1 or USR2 (with or without a `SIG` prefix) to each pid.
/// Failures are reported per pid; pids <= 0 are refused as NotPermitted.
std::vector<NotifyResult> notify(const std::vector<pid_t>& pids, std::string_view signal_name);

std::string_view to_string(NotifyStatus status) noexcept;

}  // namespace kontext
