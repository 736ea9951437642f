#include "kontext/keydb.hpp"

#include "support/generators.hpp"

#include <gtest/gtest.h>

namespace kt = kontext::testing;

#include <algorithm>

using namespace kontext;
using kontext::testing::Rng;

TEST(KeyName, ParsesSegments) {
  const auto n = KeyName::parse("getenv/http_proxy");
  EXPECT_EQ(n.segments(), (std::vector<std::string>{"getenv", "http_proxy"}));
  EXPECT_EQ(n.str(), "getenv/http_proxy");
}

TEST(KeyName, RejectsMalformedNames) {
  for (const char* bad : {"", "/a", "a/", "a//b", "a=b", "a\nb"})
    EXPECT_THROW(KeyName::parse(bad), InvalidName) << bad;
}

TEST(KeyName, IsCaseSensitiveAndUntrimmed) {
  EXPECT_NE(KeyName::parse("Path"), KeyName::parse("path"));
  EXPECT_EQ(KeyName::parse(" a ").str(), " a ");
}

TEST(KeyName, IsBelowNeedsWholeSegments) {
  const auto prefix = KeyName::parse("a/b");
  EXPECT_TRUE(KeyName::parse("a/b/c").is_below(prefix));
  EXPECT_FALSE(KeyName::parse("a/b").is_below(prefix));
  EXPECT_FALSE(KeyName::parse("a/bc/d").is_below(prefix));
  EXPECT_EQ(prefix.child("c/d").str(), "a/b/c/d");
  EXPECT_THROW(prefix.child("c//d"), InvalidName);
}

TEST(Key, MetadataIsValidated) {
  Key k(KeyName::parse("a"), "v");
  k.set_meta("context", "x/%l%");
  EXPECT_EQ(k.meta("context"), "x/%l%");
  EXPECT_THROW(k.set_meta("", "x"), std::invalid_argument);
  EXPECT_THROW(k.set_meta("a=b", "x"), std::invalid_argument);
  k.remove_meta("context");
  EXPECT_FALSE(k.meta("context"));
}

TEST(KeySet, InsertReplacesAndErases) {
  KeySet ks;
  ks.insert(Key(KeyName::parse("a"), "1"));
  ks.insert(Key(KeyName::parse("a"), "2"));
  ASSERT_EQ(ks.size(), 1U);
  EXPECT_EQ(ks.get("a")->value(), "2");
  EXPECT_EQ(ks.get("b"), nullptr);
  EXPECT_EQ(ks.get("not//valid"), nullptr);
  EXPECT_TRUE(ks.erase(KeyName::parse("a")));
  EXPECT_TRUE(ks.empty());
}

// below() against a linear scan over every key, on random sets whose names
// share many prefixes (including ones that differ only past the separator).
TEST(KeySet, BelowMatchesLinearScan) {
  const std::vector<std::string> segs = {"a", "a-", "a.b", "b", "ab", "*", "a0"};
  Rng rng(7);
  for (int round = 0; round < 50; ++round) {
    KeySet ks;
    std::vector<KeyName> names;
    for (int i = 0; i < 100; ++i) {
      std::string name;
      const auto depth = 1 + kt::pick(rng, 4);
      for (std::size_t d = 0; d < depth; ++d)
        name += (d ? "/" : "") + kt::pick_from(rng, segs);
      names.push_back(KeyName::parse(name));
      ks.insert(Key(names.back(), name));
    }
    for (int q = 0; q < 20; ++q) {
      const auto& prefix = kt::pick_from(rng, names);
      std::vector<std::string> expected;
      for (const auto& key : ks) {
        const auto& s = key.name().segments();
        const auto& p = prefix.segments();
        if (s.size() > p.size() && std::equal(p.begin(), p.end(), s.begin()))
          expected.push_back(key.name().str());
      }
      std::vector<std::string> actual;
      for (const auto& key : ks.below(prefix))
        actual.push_back(key.name().str());
      std::sort(expected.begin(), expected.end());
      std::sort(actual.begin(), actual.end());
      EXPECT_EQ(actual, expected) << prefix.str();
    }
  }
}

TEST(KeySet, InsertionOrderDoesNotMatter) {
  Rng rng(11);
  for (int round = 0; round < 30; ++round) {
    std::vector<Key> keys;
    for (const auto& k : kt::random_keyset(rng))
      keys.push_back(k);
    KeySet forward;
    for (const auto& k : keys)
      forward.insert(k);
    std::shuffle(keys.begin(), keys.end(), rng);
    KeySet shuffled;
    for (const auto& k : keys)
      shuffled.insert(k);
    EXPECT_EQ(forward, shuffled);
  }
}
