#include "kontext/scan.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace kontext::scan {

std::string_view to_string(OccurrenceKind kind) noexcept {
  switch (kind) {
    case OccurrenceKind::Call: return "call";
    case OccurrenceKind::CommentOrString: return "comment-or-string";
    case OccurrenceKind::Identifier: return "identifier";
  }
  return "unknown";
}

std::size_t FileScan::count(OccurrenceKind kind) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      occurrences.begin(), occurrences.end(), [kind](const Occurrence& o) { return o.kind == kind; }));
}

std::vector<std::string> default_extensions() {
  return {"c", "h", "cc", "cpp", "cxx", "hh", "hpp", "hxx", "m", "mm", "java", "js",
          "py", "sh", "pl", "pm", "rb"};
}

std::optional<Syntax> syntax_for_extension(std::string_view extension) {
  static const std::vector<std::string_view> c_family = {"c",  "h",   "cc",   "cpp", "cxx", "hh",
                                                         "hpp", "hxx", "m",   "mm",  "java", "js",
                                                         "ts", "rs",  "go",   "cs",  "swift"};
  static const std::vector<std::string_view> hash = {"py", "sh", "bash", "pl", "pm", "rb", "cmake"};
  if (std::find(c_family.begin(), c_family.end(), extension) != c_family.end())
    return Syntax::CFamily;
  if (std::find(hash.begin(), hash.end(), extension) != hash.end())
    return Syntax::Hash;
  return std::nullopt;
}

namespace {

bool is_word_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

enum class State { Code, LineComment, BlockComment, String };

}  // namespace

FileScan scan_source(std::string_view text, Syntax syntax, std::string path, std::string_view word) {
  FileScan result;
  result.path = std::move(path);

  State state = State::Code;
  char quote = 0;
  std::size_t line = 1;
  bool line_has_code = false;

  auto end_line = [&] {
    if (line_has_code)
      ++result.loc;
    line_has_code = false;
    ++line;
  };

  // Next non-whitespace character after `from` that is code, or 0.
  auto next_code_char = [&](std::size_t from) -> char {
    for (std::size_t j = from; j < text.size(); ++j) {
      const char c = text[j];
      if (std::isspace(static_cast<unsigned char>(c)))
        continue;
      return c;
    }
    return 0;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];

    if (c == '\n') {
      if (state == State::LineComment || state == State::String)
        state = State::Code;
      end_line();
      ++i;
      continue;
    }

    const bool at_word = text.compare(i, word.size(), word) == 0 &&
                         (i == 0 || !is_word_char(text[i - 1])) &&
                         (i + word.size() == text.size() || !is_word_char(text[i + word.size()]));
    if (at_word) {
      OccurrenceKind kind;
      if (state != State::Code) {
        kind = OccurrenceKind::CommentOrString;
      } else {
        kind = next_code_char(i + word.size()) == '(' ? OccurrenceKind::Call
                                                      : OccurrenceKind::Identifier;
        line_has_code = true;
      }
      result.occurrences.push_back({line, kind});
      i += word.size();
      continue;
    }

    switch (state) {
      case State::Code:
        if (syntax == Syntax::CFamily && c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
          state = State::LineComment;
          i += 2;
          continue;
        }
        if (syntax == Syntax::CFamily && c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
          state = State::BlockComment;
          i += 2;
          continue;
        }
        if (syntax == Syntax::Hash && c == '#') {
          state = State::LineComment;
          ++i;
          continue;
        }
        if (c == '"' || c == '\'') {
          state = State::String;
          quote = c;
          line_has_code = true;
          ++i;
          continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c)))
          line_has_code = true;
        ++i;
        break;
      case State::LineComment:
        ++i;
        break;
      case State::BlockComment:
        if (c == '*' && i + 1 < text.size() && text[i + 1] == '/') {
          state = State::Code;
          i += 2;
        } else {
          ++i;
        }
        break;
      case State::String:
        if (c == '\\' && i + 1 < text.size() && text[i + 1] != '\n') {
          i += 2;
        } else {
          if (c == quote)
            state = State::Code;
          ++i;
        }
        break;
    }
  }
  if (!text.empty() && text.back() != '\n')
    end_line();
  return result;
}

ScanTotals totals_of(const std::vector<FileScan>& files) {
  ScanTotals totals;
  for (const auto& file : files) {
    ++totals.files;
    totals.loc += file.loc;
    totals.calls += file.count(OccurrenceKind::Call);
    totals.comment_or_string += file.count(OccurrenceKind::CommentOrString);
    totals.identifiers += file.count(OccurrenceKind::Identifier);
  }
  if (totals.calls > 0)
    totals.lines_per_call = (totals.loc + totals.calls / 2) / totals.calls;
  return totals;
}

ScanReport scan_tree(const std::string& root, const std::vector<std::string>& extensions,
                     std::string_view word) {
  ScanReport report;
  std::vector<fs::path> paths;
  std::error_code ec;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) {
    report.errors.push_back(root + ": " + ec.message());
    return report;
  }
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) {
      report.errors.push_back(it->path().string() + ": " + ec.message());
      ec.clear();
      continue;
    }
    std::error_code type_ec;
    if (!it->is_regular_file(type_ec))
      continue;
    auto ext = it->path().extension().string();
    if (!ext.empty())
      ext.erase(0, 1);
    if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end())
      continue;
    paths.push_back(it->path());
  }
  std::sort(paths.begin(), paths.end());

  for (const auto& path : paths) {
    auto ext = path.extension().string().substr(1);
    const auto syntax = syntax_for_extension(ext).value_or(Syntax::CFamily);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      report.errors.push_back(path.string() + ": cannot open");
      continue;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
      report.errors.push_back(path.string() + ": read error");
      continue;
    }
    report.files.push_back(scan_source(buffer.str(), syntax, path.string(), word));
  }
  report.totals = totals_of(report.files);
  return report;
}

}  // namespace kontext::scan
