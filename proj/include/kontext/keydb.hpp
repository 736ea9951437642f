// Hierarchical key-value store with per-key metadata.

#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kontext {

class InvalidName : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A `/`-separated, case-sensitive key name. Segments are non-empty and never
/// contain `/`, `=` or a newline.
class KeyName {
public:
  /// Parses the display form (`a/b/c`). Nothing is trimmed.
  static KeyName parse(std::string_view text);

  /// Returns true if `segment` may appear as one level of a name.
  static bool valid_segment(std::string_view segment) noexcept;

  const std::vector<std::string>& segments() const noexcept { return segments_; }
  const std::string& str() const noexcept { return display_; }

  /// True if this name has `prefix` as a strict segment prefix.
  bool is_below(const KeyName& prefix) const noexcept;

  /// Appends one or more segments given in display form.
  KeyName child(std::string_view relative) const;

  friend bool operator==(const KeyName& a, const KeyName& b) noexcept {
    return a.display_ == b.display_;
  }
  friend std::strong_ordering operator<=>(const KeyName& a, const KeyName& b) noexcept {
    return a.display_ <=> b.display_;
  }

private:
  KeyName() = default;

  std::vector<std::string> segments_;
  std::string display_;
};

using Meta = std::map<std::string, std::string, std::less<>>;

/// A named configuration entry. Metadata property names are non-empty and
/// contain neither `=` nor a newline.
class Key {
public:
  explicit Key(KeyName name, std::string value = {});

  const KeyName& name() const noexcept { return name_; }
  const std::string& value() const noexcept { return value_; }
  void set_value(std::string value) { value_ = std::move(value); }

  const Meta& meta() const noexcept { return meta_; }
  std::optional<std::string_view> meta(std::string_view property) const;
  void set_meta(std::string property, std::string value);
  void remove_meta(std::string_view property);

  static bool valid_property_name(std::string_view property) noexcept;

  friend bool operator==(const Key&, const Key&) = default;

private:
  KeyName name_;
  std::string value_;
  Meta meta_;
};

/// Duplicate-free collection of keys, iterated in lexicographic order of the
/// display name. Not internally synchronized.
class KeySet {
  using Storage = std::map<std::string, Key, std::less<>>;

public:
  class const_iterator {
  public:
    using iterator_category = std::bidirectional_iterator_tag;
    using value_type = Key;
    using difference_type = std::ptrdiff_t;
    using pointer = const Key*;
    using reference = const Key&;

    const_iterator() = default;
    explicit const_iterator(Storage::const_iterator it) : it_(it) {}

    reference operator*() const { return it_->second; }
    pointer operator->() const { return &it_->second; }
    const_iterator& operator++() { ++it_; return *this; }
    const_iterator operator++(int) { auto tmp = *this; ++it_; return tmp; }
    const_iterator& operator--() { --it_; return *this; }
    const_iterator operator--(int) { auto tmp = *this; --it_; return tmp; }
    friend bool operator==(const const_iterator&, const const_iterator&) = default;

  private:
    Storage::const_iterator it_;
  };

  /// Inserts `key`, replacing any key with the same name.
  void insert(Key key);

  const Key* get(const KeyName& name) const;
  const Key* get(std::string_view name) const;
  Key* get_mutable(const KeyName& name);

  bool erase(const KeyName& name);

  /// All keys strictly below `prefix`, in iteration order.
  std::vector<Key> below(const KeyName& prefix) const;

  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  const_iterator begin() const { return const_iterator(keys_.begin()); }
  const_iterator end() const { return const_iterator(keys_.end()); }

  friend bool operator==(const KeySet&, const KeySet&) = default;

private:
  Storage keys_;
};

}  // namespace kontext
