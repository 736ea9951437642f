// Line-oriented specification format.
//
//   # comment
//   name/of/key = value
//   [name/of/key]
//   property = value
//
// A `[name]` line opens a section; `property=value` lines that follow attach
// metadata to that key until the next section. Inside a section the reserved
// property `value` carries the key's own value, and a left-hand side that
// contains `/` always names a key (property names are flat).

#pragma once

#include "kontext/keydb.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kontext {

enum class ParseErrorKind {
  BadSection,
  BadAssignment,
  PropertyOutsideSection,
  DuplicateKey,
  InvalidName,
  InvalidEncoding,
};

std::string_view to_string(ParseErrorKind kind) noexcept;

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, ParseErrorKind kind, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  ParseErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  ParseErrorKind kind_;
  std::string detail_;
};

/// A non-fatal finding; currently only DuplicateKey.
struct ParseWarning {
  std::size_t line;
  ParseErrorKind kind;
  std::string message;
};

class Unserializable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SpecDocument {
  KeySet keyset;
  std::optional<std::string> source;
  /// 1-based line of the (last) definition of each key.
  std::map<KeyName, std::size_t> line_index;
  /// 1-based line of each metadata property assignment.
  std::map<std::pair<KeyName, std::string>, std::size_t> meta_line_index;
  std::vector<ParseWarning> warnings;
};

inline constexpr std::string_view kValueProperty = "value";

SpecDocument parse_spec(std::string_view text);

/// Reads and parses a file; I/O failures are reported as std::runtime_error.
SpecDocument load_spec(const std::string& path);

/// Canonical text for `keyset`. Throws Unserializable for content the format
/// cannot express (newlines, surrounding whitespace, comment markers, a
/// user property named `value`).
std::string serialize_spec(const KeySet& keyset);
inline std::string serialize_spec(const SpecDocument& doc) { return serialize_spec(doc.keyset); }

namespace specfile_detail {
/// The text of `line` with any trailing comment removed and surrounding
/// whitespace trimmed. `#` starts a comment at line start or after whitespace.
std::string_view strip_line(std::string_view line) noexcept;
std::string_view trim(std::string_view text) noexcept;
bool valid_utf8(std::string_view text) noexcept;
}  // namespace specfile_detail

}  // namespace kontext
