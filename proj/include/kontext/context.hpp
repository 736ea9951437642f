// Layers and context-aware lookup.

#pragma once

#include "kontext/keydb.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kontext {

/// Name of the metadata property that makes a key contextual.
inline constexpr std::string_view kContextProperty = "context";
inline constexpr std::string_view kWildcard = "*";

enum class TemplateErrorKind {
  UnterminatedPlaceholder,
  InvalidLayerName,
  Unanchored,
  InvalidKeyShape,
  TooManyRefs,
};

inline constexpr std::size_t kMaxTemplateRefs = 16;

class TemplateError : public std::invalid_argument {
public:
  TemplateError(TemplateErrorKind kind, const std::string& message)
      : std::invalid_argument(message), kind_(kind) {}
  TemplateErrorKind kind() const noexcept { return kind_; }

private:
  TemplateErrorKind kind_;
};

class InvalidLayerValue : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// `http_proxy/%interface%/%network%`: literal text interleaved with layer
/// references. `%%` stands for a literal `%`.
class Template {
public:
  struct Literal {
    std::string text;
    friend bool operator==(const Literal&, const Literal&) = default;
  };
  struct LayerRef {
    std::string layer;
    friend bool operator==(const LayerRef&, const LayerRef&) = default;
  };
  using Part = std::variant<Literal, LayerRef>;

  static Template parse(std::string_view text);

  const std::vector<Part>& parts() const noexcept { return parts_; }
  std::size_t ref_count() const noexcept;
  std::vector<std::string> layers() const;

  /// Source form; `parse(t.str()) == t`.
  std::string str() const;

  friend bool operator==(const Template&, const Template&) = default;

private:
  std::vector<Part> parts_;
};

/// Active layers and their values. Layer names and values are single
/// whitespace-free key segments; a value is never `*`.
class ContextState {
public:
  static bool valid_layer_name(std::string_view name) noexcept;
  static bool valid_layer_value(std::string_view value) noexcept;

  const std::map<std::string, std::string, std::less<>>& layers() const noexcept { return layers_; }
  std::optional<std::string_view> layer(std::string_view name) const;
  std::uint64_t generation() const noexcept { return generation_; }

  /// Copy with `name` set to `value` and the generation advanced by one.
  ContextState with_layer(std::string_view name, std::string_view value) const;
  /// Copy with `name` removed (if present) and the generation advanced by one.
  ContextState without_layer(std::string_view name) const;

  /// Builds a state directly, e.g. when loading a snapshot.
  static ContextState from(std::map<std::string, std::string, std::less<>> layers,
                           std::uint64_t generation);

  friend bool operator==(const ContextState&, const ContextState&) = default;

private:
  std::map<std::string, std::string, std::less<>> layers_;
  std::uint64_t generation_ = 0;
};

/// Candidate key names for `tmpl` under `ctx`, most specific first. Each
/// reference renders as the layer's value or `*`; an inactive layer renders
/// only as `*`. Among equally specific names, a concrete position further
/// left wins.
std::vector<KeyName> candidates(const Template& tmpl, const ContextState& ctx);

struct LookupOutcome {
  std::string value;
  /// The requested name followed by every contextual hop taken.
  std::vector<KeyName> resolved_chain;
  KeyName matched_name;
};

enum class LookupErrorKind { CycleDetected, DepthExceeded, BadTemplate };

class LookupError : public std::runtime_error {
public:
  LookupError(LookupErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  LookupErrorKind kind() const noexcept { return kind_; }

private:
  LookupErrorKind kind_;
};

inline constexpr std::size_t kMaxLookupDepth = 16;

/// Resolves `name` through `context` templates. Returns nullopt if the key is
/// absent, or if no candidate exists and the key's own value is empty.
std::optional<LookupOutcome> contextual_lookup(const KeySet& keys, const KeyName& name,
                                               const ContextState& ctx);

}  // namespace kontext
