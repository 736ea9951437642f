#include "kontext/context.hpp"

#include <algorithm>
#include <bit>

namespace kontext {

Template Template::parse(std::string_view text) {
  Template tmpl;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) {
      tmpl.parts_.emplace_back(Literal{std::move(literal)});
      literal.clear();
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '%') {
      literal += text[i++];
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '%') {
      literal += '%';
      i += 2;
      continue;
    }
    const auto close = text.find('%', i + 1);
    if (close == std::string_view::npos)
      throw TemplateError(TemplateErrorKind::UnterminatedPlaceholder,
                          "unterminated placeholder in template '" + std::string(text) + "'");
    const auto layer = text.substr(i + 1, close - i - 1);
    if (!ContextState::valid_layer_name(layer))
      throw TemplateError(TemplateErrorKind::InvalidLayerName,
                          "invalid layer name '" + std::string(layer) + "' in template");
    flush();
    tmpl.parts_.emplace_back(LayerRef{std::string(layer)});
    i = close + 1;
  }
  flush();

  if (tmpl.ref_count() > kMaxTemplateRefs)
    throw TemplateError(TemplateErrorKind::TooManyRefs,
                        "template '" + std::string(text) + "' references more than " +
                            std::to_string(kMaxTemplateRefs) + " layers");
  if (tmpl.parts_.empty() || !std::holds_alternative<Literal>(tmpl.parts_.front()))
    throw TemplateError(TemplateErrorKind::Unanchored,
                        "template '" + std::string(text) + "' must start with literal text");

  // Every rendering must be a valid key name; checking with a stand-in
  // segment covers both concrete values and `*`.
  std::string probe;
  for (const auto& part : tmpl.parts_) {
    if (const auto* lit = std::get_if<Literal>(&part))
      probe += lit->text;
    else
      probe += kWildcard;
  }
  try {
    (void)KeyName::parse(probe);
  } catch (const InvalidName& e) {
    throw TemplateError(TemplateErrorKind::InvalidKeyShape,
                        "template '" + std::string(text) + "' does not form a key name: " + e.what());
  }
  return tmpl;
}

std::size_t Template::ref_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(parts_.begin(), parts_.end(), [](const Part& p) {
    return std::holds_alternative<LayerRef>(p);
  }));
}

std::vector<std::string> Template::layers() const {
  std::vector<std::string> out;
  for (const auto& part : parts_) {
    if (const auto* ref = std::get_if<LayerRef>(&part))
      out.push_back(ref->layer);
  }
  return out;
}

std::string Template::str() const {
  std::string out;
  for (const auto& part : parts_) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      for (char c : lit->text) {
        out += c;
        if (c == '%')
          out += '%';
      }
    } else {
      out += '%';
      out += std::get<LayerRef>(part).layer;
      out += '%';
    }
  }
  return out;
}

namespace {
bool plain_segment_text(std::string_view s, std::string_view forbidden) noexcept {
  if (s.empty())
    return false;
  return std::none_of(s.begin(), s.end(), [&](char c) {
    return forbidden.find(c) != std::string_view::npos || static_cast<unsigned char>(c) <= 0x20 ||
           c == 0x7F;
  });
}
}  // namespace

bool ContextState::valid_layer_name(std::string_view name) noexcept {
  return plain_segment_text(name, "/=%");
}

bool ContextState::valid_layer_value(std::string_view value) noexcept {
  return plain_segment_text(value, "/=") && value != kWildcard;
}

std::optional<std::string_view> ContextState::layer(std::string_view name) const {
  const auto it = layers_.find(name);
  if (it == layers_.end())
    return std::nullopt;
  return std::string_view(it->second);
}

ContextState ContextState::with_layer(std::string_view name, std::string_view value) const {
  if (!valid_layer_name(name))
    throw InvalidLayerValue("invalid layer name '" + std::string(name) + "'");
  if (!valid_layer_value(value))
    throw InvalidLayerValue("invalid value '" + std::string(value) + "' for layer '" +
                            std::string(name) + "'");
  ContextState next = *this;
  next.layers_.insert_or_assign(std::string(name), std::string(value));
  ++next.generation_;
  return next;
}

ContextState ContextState::without_layer(std::string_view name) const {
  ContextState next = *this;
  if (const auto it = next.layers_.find(name); it != next.layers_.end())
    next.layers_.erase(it);
  ++next.generation_;
  return next;
}

ContextState ContextState::from(std::map<std::string, std::string, std::less<>> layers,
                                std::uint64_t generation) {
  for (const auto& [name, value] : layers) {
    if (!valid_layer_name(name) || !valid_layer_value(value))
      throw InvalidLayerValue("invalid layer '" + name + "=" + value + "'");
  }
  ContextState state;
  state.layers_ = std::move(layers);
  state.generation_ = generation;
  return state;
}

std::vector<KeyName> candidates(const Template& tmpl, const ContextState& ctx) {
  // Values of the active references, left to right.
  std::vector<std::string_view> active;
  for (const auto& part : tmpl.parts()) {
    if (const auto* ref = std::get_if<Template::LayerRef>(&part)) {
      if (auto value = ctx.layer(ref->layer))
        active.push_back(*value);
    }
  }

  // Bit (n-1-i) of a mask set means active reference i renders concretely,
  // so the leftmost reference is the most significant bit.
  const std::size_t n = active.size();
  std::vector<std::uint32_t> masks(std::size_t{1} << n);
  for (std::uint32_t m = 0; m < masks.size(); ++m)
    masks[m] = m;
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa > pb : a > b;
  });

  std::vector<KeyName> out;
  out.reserve(masks.size());
  for (const auto mask : masks) {
    std::string rendered;
    std::size_t index = 0;
    for (const auto& part : tmpl.parts()) {
      if (const auto* lit = std::get_if<Template::Literal>(&part)) {
        rendered += lit->text;
        continue;
      }
      const auto& ref = std::get<Template::LayerRef>(part);
      if (!ctx.layer(ref.layer)) {
        rendered += kWildcard;
        continue;
      }
      const bool concrete = (mask >> (n - 1 - index)) & 1U;
      rendered += concrete ? active[index] : kWildcard;
      ++index;
    }
    out.push_back(KeyName::parse(rendered));
  }
  return out;
}

std::optional<LookupOutcome> contextual_lookup(const KeySet& keys, const KeyName& name,
                                               const ContextState& ctx) {
  const Key* key = keys.get(name);
  if (!key)
    return std::nullopt;

  LookupOutcome outcome{{}, {name}, name};
  while (true) {
    const auto context = key->meta(kContextProperty);
    if (!context) {
      outcome.value = key->value();
      outcome.matched_name = key->name();
      return outcome;
    }

    Template tmpl = [&] {
      try {
        return Template::parse(*context);
      } catch (const TemplateError& e) {
        throw LookupError(LookupErrorKind::BadTemplate,
                          "key '" + key->name().str() + "': " + e.what());
      }
    }();

    const Key* next = nullptr;
    for (const auto& candidate : candidates(tmpl, ctx)) {
      if ((next = keys.get(candidate)))
        break;
    }

    if (!next) {
      // No pattern entry applies: the contextual key's own value is the default.
      if (key->value().empty())
        return std::nullopt;
      outcome.value = key->value();
      outcome.matched_name = key->name();
      return outcome;
    }

    if (std::find(outcome.resolved_chain.begin(), outcome.resolved_chain.end(), next->name()) !=
        outcome.resolved_chain.end())
      throw LookupError(LookupErrorKind::CycleDetected,
                        "cycle detected resolving '" + name.str() + "' at '" +
                            next->name().str() + "'");
    outcome.resolved_chain.push_back(next->name());
    if (outcome.resolved_chain.size() > kMaxLookupDepth)
      throw LookupError(LookupErrorKind::DepthExceeded,
                        "lookup of '" + name.str() + "' exceeds depth " +
                            std::to_string(kMaxLookupDepth));
    key = next;
  }
}

}  // namespace kontext
