#include "kontext/trace.hpp"

#include "kontext/shim.hpp"

#include <charconv>
#include <map>

namespace kontext::trace {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos)
      return fields;
    start = tab + 1;
  }
}

}  // namespace

std::vector<GetenvRecord> parse_trace(std::string_view text) {
  std::vector<GetenvRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty())
      continue;

    const auto fields = split_tabs(line);
    if (fields.size() < 2)
      throw UnparseableTrace(line_no, "expected '<ns>\\t<type>...'");
    std::int64_t ns = 0;
    const auto [end, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), ns);
    if (ec != std::errc{} || end != fields[0].data() + fields[0].size())
      throw UnparseableTrace(line_no, "bad timestamp '" + std::string(fields[0]) + "'");
    if (fields[1] != "getenv")
      continue;
    if (fields.size() != 5)
      throw UnparseableTrace(line_no, "getenv record needs 5 fields");
    if (fields[3] != "hit" && fields[3] != "fallthrough" && fields[3] != "null")
      throw UnparseableTrace(line_no, "unknown outcome '" + std::string(fields[3]) + "'");
    records.push_back({ns, shim::unescape_field(fields[2]), std::string(fields[3]),
                       shim::unescape_field(fields[4])});
  }
  return records;
}

TraceReport aggregate_trace(const std::vector<GetenvRecord>& records, std::int64_t launch_ns,
                            std::chrono::milliseconds startup, const KeySet& spec) {
  const auto boundary =
      launch_ns + std::chrono::duration_cast<std::chrono::nanoseconds>(startup).count();
  std::map<std::string, std::int64_t> first_seen;
  for (const auto& record : records) {
    auto [it, inserted] = first_seen.emplace(record.name, record.ns);
    if (!inserted && record.ns < it->second)
      it->second = record.ns;
  }

  TraceReport report;
  report.total_calls = records.size();
  report.unique_params = first_seen.size();
  for (const auto& [name, ns] : first_seen) {
    if (ns < boundary)
      continue;
    report.later_names.push_back(name);
    if (KeyName::valid_segment(name) && spec.get(std::string(shim::kGetenvRoot) + "/" + name))
      report.candidate_names.push_back(name);
  }
  report.later_unique = report.later_names.size();
  report.config_candidates = report.candidate_names.size();
  return report;
}

}  // namespace kontext::trace
