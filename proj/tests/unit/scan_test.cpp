#include "kontext/scan.hpp"

#include "support/generators.hpp"
#include "support/helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace kt = kontext::testing;

using namespace kontext;
using namespace kontext::scan;
using kontext::testing::fixture;

TEST(Scan, ClassifiesOccurrences) {
  const auto f = scan_source(
      "x = getenv(\"A\");  // getenv\n"
      "/* getenv\n getenv */ p = &getenv;\n"
      "mygetenv(); getenv_r(); s = \"getenv(\";\n"
      "std::getenv (\"B\");\n",
      Syntax::CFamily);
  const std::vector<Occurrence> expected = {
      {1, OccurrenceKind::Call},        {1, OccurrenceKind::CommentOrString},
      {2, OccurrenceKind::CommentOrString}, {3, OccurrenceKind::CommentOrString},
      {3, OccurrenceKind::Identifier},  {4, OccurrenceKind::CommentOrString},
      {5, OccurrenceKind::Call}};
  EXPECT_EQ(f.occurrences, expected);
  EXPECT_EQ(f.loc, 4U);
}

TEST(Scan, CountsLinesOfCode) {
  EXPECT_EQ(scan_source("", Syntax::CFamily).loc, 0U);
  EXPECT_EQ(scan_source("\n\n  \n", Syntax::CFamily).loc, 0U);
  EXPECT_EQ(scan_source("// c\n/* a\n b */\nint x;\n", Syntax::CFamily).loc, 1U);
  EXPECT_EQ(scan_source("int x; /* a\n b */ int y;", Syntax::CFamily).loc, 2U);
  EXPECT_EQ(scan_source("# c\nx = 1  # c\n", Syntax::Hash).loc, 1U);
  EXPECT_EQ(scan_source("s = \"#\"\n", Syntax::Hash).loc, 1U);
}

TEST(Scan, HashSyntax) {
  const auto f = scan_source("import os\n# getenv\nos.getenv('X')\nv = 'getenv'\n", Syntax::Hash);
  EXPECT_EQ(f.count(OccurrenceKind::Call), 1U);
  EXPECT_EQ(f.count(OccurrenceKind::CommentOrString), 2U);
  EXPECT_EQ(f.loc, 3U);
}

TEST(Scan, FixtureCorpusExactCounts) {
  const auto report = scan_tree(fixture("scan_corpus"), default_extensions());
  EXPECT_TRUE(report.errors.empty());
  ASSERT_EQ(report.files.size(), 2U);
  EXPECT_TRUE(report.files[0].path.ends_with("lib/util.py"));
  EXPECT_TRUE(report.files[1].path.ends_with("main.c"));
  EXPECT_EQ(report.files[1].loc, 10U);
  EXPECT_EQ(report.files[1].count(OccurrenceKind::Call), 2U);
  EXPECT_EQ(report.files[1].count(OccurrenceKind::CommentOrString), 1U);
  EXPECT_EQ(report.files[1].count(OccurrenceKind::Identifier), 1U);
  EXPECT_EQ(report.totals.files, 2U);
  EXPECT_EQ(report.totals.loc, 13U);
  EXPECT_EQ(report.totals.calls, 3U);
  EXPECT_EQ(report.totals.comment_or_string, 1U);
  EXPECT_EQ(report.totals.identifiers, 1U);
  EXPECT_EQ(report.totals.lines_per_call, 4U);
}

TEST(Scan, MissingRootIsReported) {
  const auto report = scan_tree("/nonexistent/kontext", default_extensions());
  EXPECT_FALSE(report.errors.empty());
  EXPECT_EQ(report.totals.files, 0U);
  EXPECT_FALSE(report.totals.lines_per_call);
}

// Randomly assembled files of known lines: every planted line type has a
// known classification, and totals are the sums over files.
TEST(Scan, PlantedLinesProperty) {
  struct Line {
    const char* text;
    bool code;
    std::size_t calls, cos, idents;
  };
  const std::vector<Line> lines = {
      {"int a = getenv(\"X\") != 0;", true, 1, 0, 0},
      {"// getenv mention", false, 0, 1, 0},
      {"", false, 0, 0, 0},
      {"   ", false, 0, 0, 0},
      {"f(getenv);", true, 0, 0, 1},
      {"puts(\"getenv\");", true, 0, 1, 0},
      {"x = y;", true, 0, 0, 0},
      {"/* getenv getenv */", false, 0, 2, 0},
      {"getenvx(); xgetenv();", true, 0, 0, 0},
  };
  kt::Rng rng(31);
  for (int round = 0; round < 200; ++round) {
    std::vector<FileScan> files;
    ScanTotals expected;
    const auto nfiles = 1 + kt::pick(rng, 4);
    for (std::size_t i = 0; i < nfiles; ++i) {
      std::string text;
      std::size_t loc = 0, calls = 0, cos = 0, idents = 0;
      const auto n = kt::pick(rng, 30);
      for (std::size_t j = 0; j < n; ++j) {
        const auto& l = kt::pick_from(rng, lines);
        text += std::string(l.text) + "\n";
        loc += l.code;
        calls += l.calls;
        cos += l.cos;
        idents += l.idents;
      }
      const auto f = scan_source(text, Syntax::CFamily);
      ASSERT_EQ(f.loc, loc) << text;
      ASSERT_EQ(f.count(OccurrenceKind::Call), calls) << text;
      ASSERT_EQ(f.count(OccurrenceKind::CommentOrString), cos) << text;
      ASSERT_EQ(f.count(OccurrenceKind::Identifier), idents) << text;
      files.push_back(f);
      expected.loc += loc;
      expected.calls += calls;
    }
    const auto totals = totals_of(files);
    std::shuffle(files.begin(), files.end(), rng);
    const auto shuffled = totals_of(files);
    EXPECT_EQ(shuffled.loc, totals.loc);
    EXPECT_EQ(shuffled.calls, totals.calls);
    EXPECT_EQ(shuffled.comment_or_string, totals.comment_or_string);
    EXPECT_EQ(shuffled.identifiers, totals.identifiers);
    EXPECT_EQ(shuffled.lines_per_call, totals.lines_per_call);
    EXPECT_EQ(totals.files, nfiles);
    EXPECT_EQ(totals.loc, expected.loc);
    EXPECT_EQ(totals.calls, expected.calls);
    if (expected.calls) {
      const double exact = static_cast<double>(expected.loc) / static_cast<double>(expected.calls);
      EXPECT_LE(std::abs(static_cast<double>(*totals.lines_per_call) - exact), 0.5);
    } else {
      EXPECT_FALSE(totals.lines_per_call);
    }
  }
}
