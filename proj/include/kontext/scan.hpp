// Static audit of `getenv` use in a source tree.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kontext::scan {

enum class OccurrenceKind { Call, CommentOrString, Identifier };

std::string_view to_string(OccurrenceKind kind) noexcept;

struct Occurrence {
  std::size_t line;
  OccurrenceKind kind;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Comment syntax used when counting lines: `//` and `/* */` with `"`/`'`
/// literals, or `#` line comments with `"`/`'` literals.
enum class Syntax { CFamily, Hash };

struct FileScan {
  std::string path;
  /// Lines holding anything besides whitespace and comments.
  std::size_t loc = 0;
  std::vector<Occurrence> occurrences;

  std::size_t count(OccurrenceKind kind) const noexcept;
};

struct ScanTotals {
  std::size_t files = 0;
  std::size_t loc = 0;
  std::size_t calls = 0;
  std::size_t comment_or_string = 0;
  std::size_t identifiers = 0;
  /// loc / calls rounded to the nearest integer; undefined without calls.
  std::optional<std::size_t> lines_per_call;
};

struct ScanReport {
  std::vector<FileScan> files;
  ScanTotals totals;
  /// Files that could not be read, as "path: reason".
  std::vector<std::string> errors;
};

inline constexpr std::string_view kDefaultWord = "getenv";

/// Default extensions (without dot) scanned by scan_tree.
std::vector<std::string> default_extensions();

/// Syntax for a file extension (without dot), if it is a known source type.
std::optional<Syntax> syntax_for_extension(std::string_view extension);

/// Counts lines and classifies each whole-word occurrence of `word`. An
/// occurrence is a Call if the next non-space code character is `(`.
FileScan scan_source(std::string_view text, Syntax syntax, std::string path = {},
                     std::string_view word = kDefaultWord);

ScanTotals totals_of(const std::vector<FileScan>& files);

/// Scans every regular file below `root` whose extension is in `extensions`,
/// in path order.
ScanReport scan_tree(const std::string& root, const std::vector<std::string>& extensions,
                     std::string_view word = kDefaultWord);

}  // namespace kontext::scan
