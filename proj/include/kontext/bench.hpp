// In-process overhead measurement of the shim's getenv path.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace kontext::bench {

struct BenchOptions {
  std::string spec_path;
  /// Copied into a scratch directory; the original is never modified.
  std::string state_path;
  std::size_t iterations = 100'000;
  /// Variable to query; defaults to the first name under `getenv/`.
  std::optional<std::string> name;
  /// Layer changes injected during the changing-context run.
  std::size_t changes = 10;
};

struct BenchReport {
  std::size_t iterations = 0;
  std::string name;
  std::string layer;
  /// Medians over blocks of consecutive calls.
  double baseline_ns_per_call = 0;
  double shimmed_ns_per_call = 0;
  double changing_ns_per_call = 0;
  double overhead_ratio = 0;
  /// Reloads observed during the steady and changing runs.
  std::uint64_t steady_reloads = 0;
  std::uint64_t reload_count = 0;
  std::size_t injected_changes = 0;
  /// Wall time of the steady shimmed run.
  double shimmed_total_ms = 0;
  bool managed = false;
};

inline constexpr std::size_t kMinIterations = 1000;
inline constexpr std::size_t kBlockSize = 100;

/// Throws std::invalid_argument if iterations < kMinIterations.
BenchReport run_bench(const BenchOptions& options);

std::string to_json(const BenchReport& report);

}  // namespace kontext::bench
