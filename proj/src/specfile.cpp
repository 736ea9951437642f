#include "kontext/specfile.hpp"

#include <fstream>
#include <sstream>

namespace kontext {

namespace specfile_detail {

namespace {
bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::string_view trim(std::string_view text) noexcept {
  while (!text.empty() && is_space(text.front()))
    text.remove_prefix(1);
  while (!text.empty() && is_space(text.back()))
    text.remove_suffix(1);
  return text;
}

std::string_view strip_line(std::string_view line) noexcept {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' && (i == 0 || is_space(line[i - 1]))) {
      line = line.substr(0, i);
      break;
    }
  }
  return trim(line);
}

bool valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size())
      return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80)
        return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
      return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace specfile_detail

using specfile_detail::strip_line;
using specfile_detail::trim;

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::BadSection: return "bad section";
    case ParseErrorKind::BadAssignment: return "bad assignment";
    case ParseErrorKind::PropertyOutsideSection: return "property outside section";
    case ParseErrorKind::DuplicateKey: return "duplicate key";
    case ParseErrorKind::InvalidName: return "invalid name";
    case ParseErrorKind::InvalidEncoding: return "invalid encoding";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, ParseErrorKind kind, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::string(to_string(kind)) +
                         ": " + message),
      line_(line),
      kind_(kind),
      detail_(message) {}

namespace {

KeyName parse_name_at(std::string_view text, std::size_t line) {
  try {
    return KeyName::parse(text);
  } catch (const InvalidName& e) {
    throw ParseError(line, ParseErrorKind::InvalidName, e.what());
  }
}

}  // namespace

SpecDocument parse_spec(std::string_view text) {
  SpecDocument doc;
  std::optional<KeyName> section;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    const auto raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (!specfile_detail::valid_utf8(raw))
      throw ParseError(line_no, ParseErrorKind::InvalidEncoding, "line is not valid UTF-8");

    const auto line = strip_line(raw);
    if (line.empty())
      continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 2)
        throw ParseError(line_no, ParseErrorKind::BadSection, "expected '[name]'");
      const auto name = parse_name_at(trim(line.substr(1, line.size() - 2)), line_no);
      if (!doc.keyset.get(name))
        doc.keyset.insert(Key(name));
      doc.line_index.insert_or_assign(name, line_no);
      section = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line_no, ParseErrorKind::BadAssignment, "expected 'name=value'");
    const auto lhs = trim(line.substr(0, eq));
    const auto rhs = std::string(trim(line.substr(eq + 1)));
    if (lhs.empty())
      throw ParseError(line_no, ParseErrorKind::BadAssignment, "missing name before '='");

    const bool names_key = lhs.find('/') != std::string_view::npos;
    if (section && !names_key) {
      Key* key = doc.keyset.get_mutable(*section);
      if (!Key::valid_property_name(lhs))
        throw ParseError(line_no, ParseErrorKind::InvalidName,
                         "invalid property name '" + std::string(lhs) + "'");
      if (lhs == kValueProperty) {
        key->set_value(rhs);
      } else {
        key->set_meta(std::string(lhs), rhs);
      }
      doc.meta_line_index.insert_or_assign({*section, std::string(lhs)}, line_no);
      continue;
    }

    if (lhs == kValueProperty)
      throw ParseError(line_no, ParseErrorKind::PropertyOutsideSection,
                       "'value' is only valid inside a section");

    section.reset();
    const auto name = parse_name_at(lhs, line_no);
    if (doc.keyset.get(name)) {
      doc.warnings.push_back({line_no, ParseErrorKind::DuplicateKey,
                              "key '" + name.str() + "' redefined; last definition wins"});
    }
    doc.keyset.insert(Key(name, rhs));
    doc.line_index.insert_or_assign(name, line_no);
  }
  return doc;
}

SpecDocument load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open spec file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad())
    throw std::runtime_error("error reading spec file '" + path + "'");
  auto doc = parse_spec(buffer.str());
  doc.source = path;
  return doc;
}

namespace {

// A value or property value survives a parse only if trimming and comment
// stripping leave it untouched.
void check_text(std::string_view text, const KeyName& owner, std::string_view what) {
  auto fail = [&](std::string_view why) {
    throw Unserializable(std::string(what) + " of '" + owner.str() + "' " + std::string(why));
  };
  if (text.find('\n') != std::string_view::npos)
    fail("contains a newline");
  if (trim(text) != text)
    fail("has surrounding whitespace");
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] == '#' && trim(text.substr(i - 1, 1)).empty())
      fail("contains '#' after whitespace");
  }
  if (!specfile_detail::valid_utf8(text))
    fail("is not valid UTF-8");
}

void check_name(const KeyName& name) {
  const auto& s = name.str();
  check_text(s, name, "name");
  if (s.front() == '[' || s.front() == '#')
    throw Unserializable("name '" + s + "' starts with '" + s.front() + "'");
}

}  // namespace

std::string serialize_spec(const KeySet& keyset) {
  std::string out;
  bool in_section = false;
  for (const auto& key : keyset) {
    check_name(key.name());
    check_text(key.value(), key.name(), "value");
    for (const auto& [prop, value] : key.meta()) {
      if (prop == kValueProperty)
        throw Unserializable("key '" + key.name().str() + "' uses reserved property 'value'");
      if (prop.find('/') != std::string::npos || trim(prop) != prop || prop.front() == '#' ||
          prop.front() == '[')
        throw Unserializable("property '" + prop + "' of '" + key.name().str() +
                             "' cannot be written");
      check_text(value, key.name(), "property '" + prop + "'");
    }

    // A single-segment name would be read back as a property while a section
    // is open, and a key literally named `value` is reserved at top level.
    const bool plain_ok = key.meta().empty() &&
                          (!in_section || key.name().segments().size() > 1) &&
                          key.name().str() != kValueProperty;
    if (plain_ok) {
      out += key.name().str();
      out += '=';
      out += key.value();
      out += '\n';
      in_section = false;
      continue;
    }

    out += '[';
    out += key.name().str();
    out += "]\n";
    if (!key.value().empty()) {
      out += kValueProperty;
      out += '=';
      out += key.value();
      out += '\n';
    }
    for (const auto& [prop, value] : key.meta()) {
      out += prop;
      out += '=';
      out += value;
      out += '\n';
    }
    in_section = true;
  }
  return out;
}

}  // namespace kontext
