#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "forgery/data_manifest.hpp"
#include "forgery/errors.hpp"
#include "forgery/rng.hpp"
#include "test_support.hpp"

using namespace forgery;
using forgery::testing::TempDir;

namespace {

std::vector<ManifestEntry> random_manifest(Rng& rng, std::size_t n, double fake_rate) {
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestEntry e;
    e.video_id = "vid" + std::to_string(i);
    e.path = "videos/" + e.video_id;
    e.label = rng.bernoulli(fake_rate) ? 1 : 0;
    e.split = Split::train;
    e.source = rng.bernoulli(0.5) ? "dfdc" : "ff";
    out.push_back(e);
  }
  out[0].label = 0;
  out[1].label = 1;
  return out;
}

std::size_t count_label(std::span<const ManifestEntry> es, int label) {
  return std::count_if(es.begin(), es.end(), [&](const auto& e) { return e.label == label; });
}

const char* kHeader = "{\"schema\": \"forgery-manifest\", \"version\": 1}\n";

}  // namespace

TEST(Manifest, RoundTripsWithRelativePaths) {
  TempDir tmp("manifest");
  const std::vector<ManifestEntry> entries{
      {"a", tmp.path() / "videos" / "a", 0, Split::train, "ff"},
      {"b", tmp.path() / "videos" / "b.mp4", 1, Split::val, ""},
      {"c", "/elsewhere/c.mp4", 1, Split::test, "dfdc"},
  };
  write_manifest(tmp / "m.jsonl", entries);
  std::ifstream raw(tmp / "m.jsonl");
  std::string header, first;
  std::getline(raw, header);
  std::getline(raw, first);
  EXPECT_NE(header.find("forgery-manifest"), std::string::npos);
  EXPECT_NE(first.find("\"path\":\"videos/a\""), std::string::npos) << first;
  EXPECT_EQ(load_manifest(tmp / "m.jsonl"), entries);
}

TEST(Manifest, RejectsMalformedInput) {
  auto parse = [](const std::string& body) {
    std::istringstream in(body);
    return parse_manifest(in, "/base", "mem");
  };
  const std::string row = "{\"video_id\": \"a\", \"path\": \"x\", \"label\": 0, \"split\": \"train\"}\n";
  EXPECT_EQ(parse(kHeader + row).front().path, std::filesystem::path("/base/x"));
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse(row), ParseError);
  EXPECT_THROW(parse("{\"schema\": \"forgery-manifest\", \"version\": 9}\n"), ParseError);
  EXPECT_THROW(parse(kHeader + row + row), ParseError);
  EXPECT_THROW(parse(kHeader + std::string("{\"video_id\": \"a\", \"path\": \"x\", \"label\": 3, \"split\": \"train\"}\n")),
               ParseError);
  EXPECT_THROW(parse(kHeader + std::string("{\"video_id\": \"a\", \"path\": \"x\", \"label\": 0, \"split\": \"dev\"}\n")),
               ParseError);
  try {
    parse(kHeader + row + "{oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_manifest("/nonexistent/m.jsonl"), IoError);
}

TEST(Manifest, SplitNamesAndFilter) {
  for (Split s : {Split::train, Split::val, Split::test}) EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_split("holdout"), std::invalid_argument);
  const std::vector<ManifestEntry> es{{"a", "a", 0, Split::train, ""}, {"b", "b", 1, Split::test, ""},
                                      {"c", "c", 1, Split::train, ""}};
  const auto train = filter_split(es, Split::train);
  ASSERT_EQ(train.size(), 2u);
  EXPECT_EQ(train[1].video_id, "c");
  EXPECT_TRUE(filter_split(es, Split::val).empty());
}

TEST(Balance, EqualCountsKeepsMinorityAndOrder) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto es = random_manifest(rng, 10 + rng.uniform_int(0, 200), rng.uniform(0.1, 0.9));
    const std::size_t reals = count_label(es, 0), fakes = count_label(es, 1);
    const int minority = reals <= fakes ? 0 : 1;
    const auto out = balance_downsample(es, trial);
    EXPECT_EQ(count_label(out, 0), count_label(out, 1));
    EXPECT_EQ(out.size(), 2 * std::min(reals, fakes));
    std::set<std::string> kept;
    for (const auto& e : out) kept.insert(e.video_id);
    EXPECT_EQ(kept.size(), out.size());
    for (const auto& e : es)
      if (e.label == minority) EXPECT_TRUE(kept.count(e.video_id));
    std::size_t cursor = 0;
    for (const auto& e : out) {
      while (cursor < es.size() && es[cursor].video_id != e.video_id) ++cursor;
      ASSERT_LT(cursor, es.size()) << "output order differs from input order";
    }
    EXPECT_EQ(balance_downsample(es, trial), out);
  }
}

TEST(Balance, SeedsChooseDifferentSubsets) {
  Rng rng(3);
  const auto es = random_manifest(rng, 200, 0.8);
  EXPECT_NE(balance_downsample(es, 1), balance_downsample(es, 2));
}

TEST(Balance, PerSourceBalancesEachSource) {
  Rng rng(4);
  auto es = random_manifest(rng, 300, 0.7);
  for (const char* src : {"dfdc", "ff"}) {
    es.push_back({std::string(src) + "-r", "r", 0, Split::train, src});
    es.push_back({std::string(src) + "-f", "f", 1, Split::train, src});
  }
  const auto out = balance_downsample(es, 7, true);
  std::map<std::string, std::array<int, 2>> counts;
  for (const auto& e : out) ++counts[e.source][e.label];
  ASSERT_EQ(counts.size(), 2u);
  for (const auto& [src, c] : counts) EXPECT_EQ(c[0], c[1]) << src;
}

TEST(Balance, MissingClassThrows) {
  const std::vector<ManifestEntry> es{{"a", "a", 1, Split::train, ""}, {"b", "b", 1, Split::train, ""}};
  EXPECT_THROW(balance_downsample(es, 0), std::invalid_argument);
  EXPECT_THROW(balance_downsample({}, 0), std::invalid_argument);
}
