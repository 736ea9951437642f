#include "kontext/keydb.hpp"

#include <algorithm>

namespace kontext {

bool KeyName::valid_segment(std::string_view segment) noexcept {
  if (segment.empty())
    return false;
  return segment.find_first_of("/=\n") == std::string_view::npos;
}

KeyName KeyName::parse(std::string_view text) {
  if (text.empty())
    throw InvalidName("empty key name");
  if (text.front() == '/' || text.back() == '/')
    throw InvalidName("key name '" + std::string(text) + "' starts or ends with '/'");

  KeyName name;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    const auto segment = text.substr(start, slash == std::string_view::npos ? slash : slash - start);
    if (segment.empty())
      throw InvalidName("key name '" + std::string(text) + "' has an empty segment");
    if (!valid_segment(segment))
      throw InvalidName("key name '" + std::string(text) + "' contains '=' or a newline");
    name.segments_.emplace_back(segment);
    if (slash == std::string_view::npos)
      break;
    start = slash + 1;
  }
  name.display_ = std::string(text);
  return name;
}

bool KeyName::is_below(const KeyName& prefix) const noexcept {
  if (segments_.size() <= prefix.segments_.size())
    return false;
  return std::equal(prefix.segments_.begin(), prefix.segments_.end(), segments_.begin());
}

KeyName KeyName::child(std::string_view relative) const {
  return parse(display_ + "/" + std::string(relative));
}

Key::Key(KeyName name, std::string value) : name_(std::move(name)), value_(std::move(value)) {}

std::optional<std::string_view> Key::meta(std::string_view property) const {
  const auto it = meta_.find(property);
  if (it == meta_.end())
    return std::nullopt;
  return std::string_view(it->second);
}

bool Key::valid_property_name(std::string_view property) noexcept {
  return !property.empty() && property.find_first_of("=\n") == std::string_view::npos;
}

void Key::set_meta(std::string property, std::string value) {
  if (!valid_property_name(property))
    throw std::invalid_argument("invalid metadata property name '" + property + "'");
  meta_.insert_or_assign(std::move(property), std::move(value));
}

void Key::remove_meta(std::string_view property) {
  if (const auto it = meta_.find(property); it != meta_.end())
    meta_.erase(it);
}

void KeySet::insert(Key key) {
  auto name = key.name().str();
  keys_.insert_or_assign(std::move(name), std::move(key));
}

const Key* KeySet::get(const KeyName& name) const { return get(std::string_view(name.str())); }

const Key* KeySet::get(std::string_view name) const {
  const auto it = keys_.find(name);
  return it == keys_.end() ? nullptr : &it->second;
}

Key* KeySet::get_mutable(const KeyName& name) {
  const auto it = keys_.find(name.str());
  return it == keys_.end() ? nullptr : &it->second;
}

bool KeySet::erase(const KeyName& name) { return keys_.erase(name.str()) > 0; }

std::vector<Key> KeySet::below(const KeyName& prefix) const {
  // Every descendant's display name starts with "<prefix>/", and those names
  // form one contiguous run in display order.
  const std::string lead = prefix.str() + "/";
  std::vector<Key> out;
  for (auto it = keys_.lower_bound(lead); it != keys_.end(); ++it) {
    if (it->first.compare(0, lead.size(), lead) != 0)
      break;
    out.push_back(it->second);
  }
  return out;
}

}  // namespace kontext
