// Aggregation of shim trace logs into per-run getenv statistics.

#pragma once

#include "kontext/keydb.hpp"

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kontext::trace {

class UnparseableTrace : public std::runtime_error {
public:
  UnparseableTrace(std::size_t line, const std::string& message)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// One `getenv` record: `<ns>\tgetenv\t<name>\t<hit|fallthrough|null>\t<value>`.
struct GetenvRecord {
  std::int64_t ns;
  std::string name;
  std::string outcome;
  std::string value;
};

/// Getenv records of a trace log, in file order. Records of other types
/// (init-failed, open, counters, ...) are skipped.
std::vector<GetenvRecord> parse_trace(std::string_view text);

struct TraceReport {
  std::size_t total_calls = 0;
  std::size_t unique_params = 0;
  std::size_t later_unique = 0;
  std::size_t config_candidates = 0;
  std::vector<std::string> later_names;
  std::vector<std::string> candidate_names;
};

/// `later` names are first seen at or after launch_ns + startup; candidates
/// are the later names with a `getenv/<name>` key in `spec`.
TraceReport aggregate_trace(const std::vector<GetenvRecord>& records, std::int64_t launch_ns,
                            std::chrono::milliseconds startup, const KeySet& spec);

}  // namespace kontext::trace
