/*
 * Copyright 2026 The Recolab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/parallel.h"
#include "recolab/rng.h"
#include "recolab/text.h"
#include "recolab/timeutil.h"
#include "test_util.h"

namespace recolab {
namespace {

TEST(Fnv1a64Test, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
}

TEST(FormatDoubleTest, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, DerivedSeedsDiffer) {
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(1, 1));
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(2, 0));
  EXPECT_EQ(DeriveSeed(9, 3), DeriveSeed(9, 3));
}

TEST(RngTest, UniformAndNormalMoments) {
  Rng rng(5);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.Normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}

TEST(RngTest, BelowStaysInRange) {
  Rng rng(11);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[rng.Below(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(TimeTest, ParsesVariants) {
  const Instant t = ParseInstant("2024-03-01T10:20:30Z");
  EXPECT_EQ(FormatInstant(t), "2024-03-01T10:20:30Z");
  EXPECT_EQ(ParseInstant("2024-03-01 10:20:30"), t);
  EXPECT_EQ(ParseInstant("2024-03-01T12:20:30+02:00"), t);
  EXPECT_EQ(ParseInstant("2024-03-01T10:20:30.999Z"), t);
  EXPECT_EQ(FormatInstant(ParseInstant("2024-03-01")), "2024-03-01T00:00:00Z");
  EXPECT_FALSE(TryParseInstant("2024-02-30T00:00:00Z"));
  EXPECT_FALSE(TryParseInstant("yesterday"));
  EXPECT_FALSE(TryParseInstant("2024-03-01T10:20"));
}

TEST(TimeTest, WholeDays) {
  const Instant a = ParseInstant("2024-01-01T12:00:00Z");
  EXPECT_EQ(WholeDaysBetween(a, ParseInstant("2024-01-02T11:59:59Z")), 0);
  EXPECT_EQ(WholeDaysBetween(a, ParseInstant("2024-01-31T12:00:00Z")), 30);
}

TEST(CsvTest, QuotedFieldsRoundTrip) {
  testing::TempDir dir("csv");
  const std::vector<std::string> row = {"plain", "with,comma", "say \"hi\"",
                                        "two\nlines", ""};
  {
    CsvWriter w(dir / "x.csv");
    w.Row(row);
    w.Row({"a", "b"});
    w.Close();
  }
  auto in = OpenForRead(dir / "x.csv");
  CsvReader reader(in);
  std::vector<std::string> got;
  ASSERT_TRUE(reader.Next(got));
  EXPECT_EQ(got, row);
  ASSERT_TRUE(reader.Next(got));
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(reader.line(), 3u);
  EXPECT_FALSE(reader.Next(got));
}

TEST(CsvTest, StripsBomAndCarriageReturn) {
  std::istringstream in("\xEF\xBB\xBFx,y\r\n1,2\r\n");
  CsvReader reader(in);
  std::vector<std::string> got;
  ASSERT_TRUE(reader.Next(got));
  EXPECT_EQ(got, (std::vector<std::string>{"x", "y"}));
  ASSERT_TRUE(reader.Next(got));
  EXPECT_EQ(got, (std::vector<std::string>{"1", "2"}));
}

TEST(TextTest, LowercasesAndDropsStopWords) {
  EXPECT_EQ(NormalizeText("The BEACH, the sea!"),
            (std::vector<std::string>{"beach", "sea"}));
}

TEST(TextTest, SuffixStripping) {
  EXPECT_EQ(StripSuffix("beaches"), "beach");
  EXPECT_EQ(StripSuffix("walking"), "walk");
  EXPECT_EQ(StripSuffix("cities"), "city");
  EXPECT_EQ(StripSuffix("glass"), "glass");
  EXPECT_EQ(StripSuffix("bus"), "bus");
  TextNormalizer raw({}, false);
  EXPECT_EQ(raw.Normalize("Walking the Beaches"),
            (std::vector<std::string>{"walking", "the", "beaches"}));
}

TEST(ParallelForTest, EveryIndexOnce) {
  for (int jobs : {1, 3, 8}) {
    std::vector<int> hits(97, 0);
    ParallelFor(hits.size(), jobs, [&](size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

}  // namespace
}  // namespace recolab
