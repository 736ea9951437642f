// LD_PRELOAD entry points. Build as a shared object and preload it; every
// export falls back to the next definition (libc) when the engine declines.

#include "kontext/shim.hpp"

#include <cerrno>
#include <cstdarg>
#include <cstdio>
#include <cstring>

#include <dlfcn.h>
#include <fcntl.h>
#include <pthread.h>

#define KONTEXT_EXPORT extern "C" __attribute__((visibility("default")))

namespace {

using kontext::shim::Engine;
using kontext::shim::ShimConfig;

using OpenFn = int (*)(const char*, int, ...);
using OpenatFn = int (*)(int, const char*, int, ...);
using Open2Fn = int (*)(const char*, int);
using FopenFn = FILE* (*)(const char*, const char*);

// Nonzero while the shim itself is running on this thread; calls made by
// engine internals then go straight to libc.
__attribute__((tls_model("initial-exec"))) thread_local int t_depth = 0;

struct ReentryGuard {
  ReentryGuard() noexcept { ++t_depth; }
  ~ReentryGuard() { --t_depth; }
  ReentryGuard(const ReentryGuard&) = delete;
  ReentryGuard& operator=(const ReentryGuard&) = delete;
};

template <typename Fn>
Fn next_symbol(const char* name) {
  return reinterpret_cast<Fn>(::dlsym(RTLD_NEXT, name));
}

kontext::shim::GetenvFn real_getenv() {
  static const auto fn = next_symbol<kontext::shim::GetenvFn>("getenv");
  return fn;
}

Engine* g_engine = nullptr;

Engine& engine() {
  static Engine* instance = [] {
    // Never destroyed: answers handed to the host must outlive static teardown.
    auto* e = new Engine(ShimConfig::from_environment(real_getenv()), real_getenv());
    g_engine = e;
    ::pthread_atfork([] { g_engine->lock(); }, [] { g_engine->unlock(); },
                     [] { g_engine->unlock(); });
    return e;
  }();
  return *instance;
}

bool read_only_flags(int flags) noexcept {
  return (flags & O_ACCMODE) == O_RDONLY && !(flags & (O_CREAT | O_TRUNC | O_APPEND));
}

bool read_only_mode(const char* mode) noexcept {
  return mode && mode[0] == 'r' && !std::strchr(mode, '+');
}

bool needs_mode(int flags) noexcept {
  return (flags & O_CREAT) || (flags & O_TMPFILE) == O_TMPFILE;
}

// Shadow path for a managed read of `path`, or nullopt to use the original.
std::optional<std::string> redirect(const char* path, bool read_only) {
  if (t_depth > 0 || !path || !read_only)
    return std::nullopt;
  const int saved = errno;
  ReentryGuard guard;
  std::optional<std::string> shadow;
  try {
    shadow = engine().open_redirect(path, read_only);
  } catch (...) {
    shadow.reset();
  }
  errno = saved;
  return shadow;
}

int open_with(OpenFn real, const char* path, int flags, mode_t mode) {
  if (auto shadow = redirect(path, read_only_flags(flags)))
    return real(shadow->c_str(), flags, mode);
  return real(path, flags, mode);
}

int openat_with(OpenatFn real, int dirfd, const char* path, int flags, mode_t mode) {
  // Relative paths against a directory descriptor are not managed.
  const bool resolvable = path && (path[0] == '/' || dirfd == AT_FDCWD);
  if (resolvable) {
    if (auto shadow = redirect(path, read_only_flags(flags)))
      return real(dirfd, shadow->c_str(), flags, mode);
  }
  return real(dirfd, path, flags, mode);
}

FILE* fopen_with(FopenFn real, const char* path, const char* mode) {
  if (auto shadow = redirect(path, read_only_mode(mode)))
    return real(shadow->c_str(), mode);
  return real(path, mode);
}

mode_t take_mode(int flags, va_list args) {
  return needs_mode(flags) ? static_cast<mode_t>(va_arg(args, int)) : 0;
}

__attribute__((destructor)) void shim_teardown() {
  if (!g_engine)
    return;
  ReentryGuard guard;
  g_engine->trace_counters();
  g_engine->remove_shadow_dir();
}

}  // namespace

KONTEXT_EXPORT char* getenv(const char* name) {
  if (t_depth > 0 || !name)
    return real_getenv()(name);
  const int saved = errno;
  ReentryGuard guard;
  char* result;
  try {
    result = const_cast<char*>(engine().getenv(name));
  } catch (...) {
    result = real_getenv()(name);
  }
  errno = saved;
  return result;
}

KONTEXT_EXPORT int open(const char* path, int flags, ...) {
  va_list args;
  va_start(args, flags);
  const mode_t mode = take_mode(flags, args);
  va_end(args);
  static const auto real = next_symbol<OpenFn>("open");
  return open_with(real, path, flags, mode);
}

KONTEXT_EXPORT int open64(const char* path, int flags, ...) {
  va_list args;
  va_start(args, flags);
  const mode_t mode = take_mode(flags, args);
  va_end(args);
  static const auto real = next_symbol<OpenFn>("open64");
  return open_with(real, path, flags, mode);
}

KONTEXT_EXPORT int openat(int dirfd, const char* path, int flags, ...) {
  va_list args;
  va_start(args, flags);
  const mode_t mode = take_mode(flags, args);
  va_end(args);
  static const auto real = next_symbol<OpenatFn>("openat");
  return openat_with(real, dirfd, path, flags, mode);
}

KONTEXT_EXPORT int openat64(int dirfd, const char* path, int flags, ...) {
  va_list args;
  va_start(args, flags);
  const mode_t mode = take_mode(flags, args);
  va_end(args);
  static const auto real = next_symbol<OpenatFn>("openat64");
  return openat_with(real, dirfd, path, flags, mode);
}

// Fortified builds call these instead of open/open64.
KONTEXT_EXPORT int __open_2(const char* path, int flags) {
  static const auto real = next_symbol<Open2Fn>("__open_2");
  if (auto shadow = redirect(path, read_only_flags(flags)))
    return real(shadow->c_str(), flags);
  return real(path, flags);
}

KONTEXT_EXPORT int __open64_2(const char* path, int flags) {
  static const auto real = next_symbol<Open2Fn>("__open64_2");
  if (auto shadow = redirect(path, read_only_flags(flags)))
    return real(shadow->c_str(), flags);
  return real(path, flags);
}

KONTEXT_EXPORT FILE* fopen(const char* path, const char* mode) {
  static const auto real = next_symbol<FopenFn>("fopen");
  return fopen_with(real, path, mode);
}

KONTEXT_EXPORT FILE* fopen64(const char* path, const char* mode) {
  static const auto real = next_symbol<FopenFn>("fopen64");
  return fopen_with(real, path, mode);
}
