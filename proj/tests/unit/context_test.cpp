#include "kontext/context.hpp"
#include "kontext/specfile.hpp"

#include "support/generators.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace kontext;
using namespace kontext::testing;

namespace {

std::vector<std::string> names_of(const std::vector<KeyName>& names) {
  std::vector<std::string> out;
  for (const auto& n : names)
    out.push_back(n.str());
  return out;
}

ContextState state(std::map<std::string, std::string, std::less<>> layers) {
  return ContextState::from(std::move(layers), 0);
}

const KeySet& proxy_spec() {
  static const KeySet ks = load_spec(fixture("proxy.ks")).keyset;
  return ks;
}

std::optional<std::string> proxy_for(std::map<std::string, std::string, std::less<>> layers) {
  const auto outcome =
      contextual_lookup(proxy_spec(), KeyName::parse("getenv/http_proxy"), state(std::move(layers)));
  if (!outcome)
    return std::nullopt;
  return outcome->value;
}

TemplateErrorKind template_error(std::string_view text) {
  try {
    Template::parse(text);
  } catch (const TemplateError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return TemplateErrorKind::TooManyRefs;
}

}  // namespace

TEST(Template, ParsesPlaceholders) {
  const auto t = Template::parse("http_proxy/%interface%/%network%");
  const std::vector<Template::Part> expected = {
      Template::Literal{"http_proxy/"}, Template::LayerRef{"interface"}, Template::Literal{"/"},
      Template::LayerRef{"network"}};
  EXPECT_EQ(t.parts(), expected);
  EXPECT_EQ(t.ref_count(), 2U);
  EXPECT_EQ(t.str(), "http_proxy/%interface%/%network%");
}

TEST(Template, PlainTextIsOneLiteral) {
  const auto t = Template::parse("plain/key");
  ASSERT_EQ(t.parts().size(), 1U);
  EXPECT_EQ(std::get<Template::Literal>(t.parts()[0]).text, "plain/key");
}

TEST(Template, DoublePercentIsLiteral) {
  const auto t = Template::parse("a/100%%/%x%");
  EXPECT_EQ(t.ref_count(), 1U);
  EXPECT_EQ(Template::parse(t.str()), t);
  EXPECT_EQ(names_of(candidates(t, state({}))), (std::vector<std::string>{"a/100%/*"}));
}

TEST(Template, Errors) {
  EXPECT_EQ(template_error("a/%x"), TemplateErrorKind::UnterminatedPlaceholder);
  EXPECT_EQ(template_error("a/%x y%"), TemplateErrorKind::InvalidLayerName);
  EXPECT_EQ(template_error("%x%/a"), TemplateErrorKind::Unanchored);
  EXPECT_EQ(template_error("a//%x%"), TemplateErrorKind::InvalidKeyShape);
  std::string many = "a";
  for (int i = 0; i < 17; ++i)
    many += "/%l" + std::to_string(i) + "%";
  EXPECT_EQ(template_error(many), TemplateErrorKind::TooManyRefs);
}

TEST(Candidates, PaperOrder) {
  const auto t = Template::parse("http_proxy/%interface%/%network%");
  EXPECT_EQ(names_of(candidates(t, state({{"interface", "eth"}, {"network", "work"}}))),
            (std::vector<std::string>{"http_proxy/eth/work", "http_proxy/eth/*",
                                      "http_proxy/*/work", "http_proxy/*/*"}));
}

TEST(Candidates, InactiveLayerOnlyWildcard) {
  const auto t = Template::parse("http_proxy/%interface%/%network%");
  EXPECT_EQ(names_of(candidates(t, state({{"network", "work"}}))),
            (std::vector<std::string>{"http_proxy/*/work", "http_proxy/*/*"}));
  EXPECT_EQ(names_of(candidates(t, state({}))), (std::vector<std::string>{"http_proxy/*/*"}));
}

TEST(Candidates, MatchesOracleAndIsStrictlyOrdered) {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const auto shape = random_shape(rng, "base", pick(rng, 4), layer_pool());
    const auto layers = random_layers(rng, layer_pool(), 0.5);
    const auto actual = names_of(candidates(Template::parse(shape.text()), to_state(layers)));
    ASSERT_EQ(actual, oracle_candidates(shape, layers)) << shape.text();
    std::size_t active_refs = 0;
    for (const auto& r : shape.refs)
      active_refs += layers.count(r);
    EXPECT_EQ(actual.size(), std::size_t{1} << active_refs);
    EXPECT_EQ(std::set<std::string>(actual.begin(), actual.end()).size(), actual.size());
  }
}

TEST(Lookup, PaperScenarios) {
  EXPECT_EQ(proxy_for({{"interface", "eth"}, {"network", "work"}}), "proxy.example.com");
  EXPECT_EQ(proxy_for({{"interface", "wlan"}, {"network", "home"}}), "proxy.example.org");
  EXPECT_EQ(proxy_for({{"interface", "wlan"}, {"network", "cafe"}}), "default.example.com");
  EXPECT_EQ(proxy_for({{"interface", "usb"}, {"network", "cafe"}}), "default.example.com");
  EXPECT_EQ(proxy_for({}), "default.example.com");
}

TEST(Lookup, ChainAndMatchedName) {
  const auto outcome = contextual_lookup(proxy_spec(), KeyName::parse("getenv/http_proxy"),
                                         state({{"interface", "usb"}, {"network", "cafe"}}));
  ASSERT_TRUE(outcome);
  EXPECT_EQ(outcome->matched_name.str(), "http_proxy/*/*");
  EXPECT_EQ(names_of(outcome->resolved_chain),
            (std::vector<std::string>{"getenv/http_proxy", "http_proxy/*/*"}));
}

TEST(Lookup, PlainKeyAndAbsentKey) {
  KeySet ks;
  ks.insert(Key(KeyName::parse("k"), "v"));
  for (const auto& ctx : {state({}), state({{"network", "home"}})}) {
    EXPECT_EQ(contextual_lookup(ks, KeyName::parse("k"), ctx)->value, "v");
    EXPECT_FALSE(contextual_lookup(ks, KeyName::parse("missing"), ctx));
  }
}

TEST(Lookup, FallsBackToOwnValueThenAbsent) {
  KeySet ks = parse_spec("[getenv/x]\nvalue=own\ncontext=p/%l%\n[getenv/y]\ncontext=p/%l%\n").keyset;
  const auto outcome = contextual_lookup(ks, KeyName::parse("getenv/x"), state({{"l", "a"}}));
  ASSERT_TRUE(outcome);
  EXPECT_EQ(outcome->value, "own");
  EXPECT_EQ(outcome->matched_name.str(), "getenv/x");
  EXPECT_FALSE(contextual_lookup(ks, KeyName::parse("getenv/y"), state({{"l", "a"}})));
}

TEST(Lookup, CycleAndDepthErrors) {
  const KeySet cyclic = parse_spec("[a]\ncontext=b\n[b]\ncontext=a\n").keyset;
  try {
    contextual_lookup(cyclic, KeyName::parse("a"), state({}));
    FAIL();
  } catch (const LookupError& e) {
    EXPECT_EQ(e.kind(), LookupErrorKind::CycleDetected);
  }
  std::string text;
  for (int i = 0; i < 20; ++i)
    text += "[k" + std::to_string(i) + "]\nvalue=end\ncontext=k" + std::to_string(i + 1) + "\n";
  try {
    contextual_lookup(parse_spec(text).keyset, KeyName::parse("k0"), state({}));
    FAIL();
  } catch (const LookupError& e) {
    EXPECT_EQ(e.kind(), LookupErrorKind::DepthExceeded);
  }
  const KeySet bad = parse_spec("[a]\ncontext=x/%open\n").keyset;
  try {
    contextual_lookup(bad, KeyName::parse("a"), state({}));
    FAIL();
  } catch (const LookupError& e) {
    EXPECT_EQ(e.kind(), LookupErrorKind::BadTemplate);
  }
}

TEST(Lookup, MatchesOracle) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto inst = random_lookup_instance(rng, i % 10 == 0);
    const auto expected = oracle_lookup(inst.entries, inst.query, inst.layers);
    const auto actual = engine_result(inst.keyset(), inst.query, inst.layers);
    ASSERT_TRUE(same_result(expected, actual))
        << "instance " << i << ": oracle " << describe(expected) << ", engine " << describe(actual);
    if (inst.cycle_seeded) {
      EXPECT_TRUE(std::holds_alternative<OracleCycle>(actual));
    }
  }
}

TEST(Lookup, IrrelevantLayerInvariance) {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_lookup_instance(rng, false);
    const auto ks = inst.keyset();
    auto with_extra = inst.layers;
    with_extra["unrelated"] = pick_from(rng, value_pool());
    EXPECT_TRUE(same_result(engine_result(ks, inst.query, inst.layers),
                            engine_result(ks, inst.query, with_extra)));
  }
}

// Adding the fully concrete entry for the current context never makes the
// first hop less concrete.
TEST(Lookup, MonotoneSpecificity) {
  Rng rng(23);
  auto concreteness = [](const std::string& name) {
    return static_cast<long>(name.size()) - 2 * std::count(name.begin(), name.end(), '*');
  };
  for (int i = 0; i < 300; ++i) {
    auto inst = random_lookup_instance(rng, false);
    inst.query = "getenv/x";
    const auto before = engine_result(inst.keyset(), inst.query, inst.layers);
    const auto& root = *oracle_find(inst.entries, "getenv/x");
    const auto best = oracle_candidates(*root.context, inst.layers).front();
    if (oracle_find(inst.entries, best))
      continue;
    inst.entries.push_back({best, "concrete", std::nullopt});
    const auto after = engine_result(inst.keyset(), inst.query, inst.layers);
    const auto* v = std::get_if<OracleValue>(&after);
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(v->chain.at(1), best);
    if (const auto* b = std::get_if<OracleValue>(&before); b && b->chain.size() > 1) {
      EXPECT_GE(concreteness(v->chain[1]), concreteness(b->chain[1]));
    }
  }
}

TEST(ContextState, WithAndWithoutLayer) {
  const ContextState empty;
  const auto one = empty.with_layer("network", "work");
  EXPECT_EQ(one.layer("network"), "work");
  EXPECT_EQ(one.generation(), 1U);
  const auto removed = one.without_layer("network");
  EXPECT_EQ(removed.layers(), empty.layers());
  EXPECT_EQ(removed.generation(), 2U);
  const auto again = removed.without_layer("network");
  EXPECT_EQ(again.layers(), empty.layers());
  EXPECT_EQ(again.generation(), 3U);

  const auto outcome =
      contextual_lookup(proxy_spec(), KeyName::parse("getenv/http_proxy"),
                        empty.with_layer("interface", "eth").with_layer("network", "work"));
  EXPECT_EQ(outcome->matched_name.str(), "http_proxy/eth/work");
}

TEST(ContextState, RejectsInvalidLayerValues) {
  const ContextState s;
  for (const char* bad : {"a/b", "a\nb", "", "*", "a=b", "two words"})
    EXPECT_THROW(s.with_layer("network", bad), InvalidLayerValue) << bad;
  EXPECT_THROW(s.with_layer("bad/name", "v"), InvalidLayerValue);
}
