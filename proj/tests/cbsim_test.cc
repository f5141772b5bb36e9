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

#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "gtest/gtest.h"
#include "recolab/cbsim.h"
#include "recolab/common.h"
#include "recolab/corpus.h"
#include "recolab/rng.h"
#include "test_util.h"

namespace recolab {
namespace {

ItemRecord Record(std::string color, std::optional<double> price,
                  std::optional<double> flat = 7.0) {
  ItemRecord r;
  r.nominal["color"] = std::move(color);
  r.numeric["price"] = price;
  r.numeric["flat"] = flat;
  r.last_update = ParseDate("2024-01-01");
  return r;
}

Catalog SmallCatalog() {
  CatalogSchema schema;
  schema.attributes = {{"price", AttributeType::kNumeric},
                       {"color", AttributeType::kNominal},
                       {"flat", AttributeType::kNumeric}};
  std::map<std::string, ItemRecord> items;
  items["a"] = Record("red", 1.0);
  items["b"] = Record("green", 2.0);
  items["c"] = Record("blue", 3.0);
  items["d"] = Record("red", std::nullopt);
  items["e"] = Record("green", 2.0);
  return Catalog(schema, std::move(items));
}

TEST(VectorizeTest, ColumnOrderAndOneHot) {
  const auto m = VectorizeAttributes(SmallCatalog());
  EXPECT_EQ(m.columns(), (std::vector<std::string>{"color=blue", "color=green",
                                                   "color=red", "flat", "price"}));
  for (size_t i = 0; i < m.size(); ++i) {
    const auto row = m.row(i);
    EXPECT_EQ(row[0] + row[1] + row[2], 1.0);
  }
}

TEST(VectorizeTest, StandardizesWithPopulationStddev) {
  CatalogSchema schema;
  schema.attributes = {{"x", AttributeType::kNumeric}};
  std::map<std::string, ItemRecord> items;
  for (int i = 1; i <= 3; ++i) {
    ItemRecord r;
    r.numeric["x"] = i;
    r.last_update = ParseDate("2024-01-01");
    items["i" + std::to_string(i)] = r;
  }
  const auto m = VectorizeAttributes(Catalog(schema, items));
  EXPECT_NEAR(m.row(0)[0], -1.2247, 5e-5);
  EXPECT_NEAR(m.row(1)[0], 0.0, 1e-15);
  EXPECT_NEAR(m.row(2)[0], 1.2247, 5e-5);
  EXPECT_NEAR(m.row(2)[0], std::sqrt(1.5), 1e-12);
}

TEST(VectorizeTest, NullsImputeToZeroAndZeroVarianceWarns) {
  const auto m = VectorizeAttributes(SmallCatalog());
  const int d = *m.IndexOf("d");
  EXPECT_EQ(m.row(d)[4], 0.0);
  // Non-null prices 1,2,3,2: mean 2, population sd sqrt(0.5).
  EXPECT_NEAR(m.row(*m.IndexOf("a"))[4], -1.0 / std::sqrt(0.5), 1e-12);
  double mean = 0, sq = 0;
  for (const char* id : {"a", "b", "c", "e"}) {
    const double v = m.row(*m.IndexOf(id))[4];
    mean += v / 4;
    sq += v * v / 4;
  }
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(sq, 1.0, 1e-9);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("flat"), std::string::npos);
  for (size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m.row(i)[3], 0.0);
}

TEST(CbSimilarityTest, SelfSwitch) {
  const auto m = VectorizeAttributes(SmallCatalog());
  EXPECT_EQ(CbSimilarity(m, "a", "a", true), 1.0);
  EXPECT_EQ(CbSimilarity(m, "a", "a", false), 0.0);
  try {
    CbSimilarity(m, "a", "zz", true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unknown_item");
  }
}

TEST(CbSimilarityTest, OrthogonalOneHots) {
  CatalogSchema schema;
  schema.attributes = {{"color", AttributeType::kNominal}};
  std::map<std::string, ItemRecord> items;
  for (const char* c : {"red", "blue"}) {
    ItemRecord r;
    r.nominal["color"] = c;
    r.last_update = ParseDate("2024-01-01");
    items[c] = r;
  }
  const auto m = VectorizeAttributes(Catalog(schema, items));
  EXPECT_EQ(CbSimilarity(m, "red", "blue", true), 0.0);
}

TEST(CosineTest, ZeroVectorIsZero) {
  const std::vector<double> z = {0, 0}, x = {1, 2};
  EXPECT_EQ(Cosine(z, x), 0.0);
  EXPECT_NEAR(Cosine(x, x), 1.0, 1e-15);
}

TEST(CbSimilarityTest, SymmetricAndBounded) {
  CatalogSchema schema;
  schema.attributes = {{"k", AttributeType::kNominal},
                       {"u", AttributeType::kNumeric},
                       {"v", AttributeType::kNumeric}};
  Rng rng(12);
  std::map<std::string, ItemRecord> items;
  for (int i = 0; i < 40; ++i) {
    ItemRecord r;
    r.nominal["k"] = "k" + std::to_string(rng.Below(4));
    r.numeric["u"] = rng.Normal();
    r.numeric["v"] = rng.Bernoulli(0.1) ? std::nullopt
                                        : std::optional<double>(rng.Uniform(0, 50));
    r.last_update = ParseDate("2024-01-01");
    items["i" + std::to_string(i)] = r;
  }
  const auto m = VectorizeAttributes(Catalog(schema, items));
  for (const auto& a : m.item_ids()) {
    for (const auto& b : m.item_ids()) {
      if (a == b) continue;
      const double s = CbSimilarity(m, a, b, false);
      EXPECT_EQ(s, CbSimilarity(m, b, a, false));
      EXPECT_GE(s, -1.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(AttributeMatrixTest, SaveLoadBitExact) {
  testing::TempDir dir("cbsim_io");
  const auto m = VectorizeAttributes(SmallCatalog());
  m.Save(dir / "cb.csv", dir / "cb.json");
  const auto back = AttributeMatrix::Load(dir / "cb.csv", dir / "cb.json");
  EXPECT_EQ(back.columns(), m.columns());
  EXPECT_EQ(back.item_ids(), m.item_ids());
  EXPECT_EQ(back.warnings, m.warnings);
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = 0; j < m.size(); ++j) {
      EXPECT_EQ(CbSimilarity(back, m.item_ids()[i], m.item_ids()[j], false),
                CbSimilarity(m, m.item_ids()[i], m.item_ids()[j], false));
    }
  }
  EXPECT_EQ(back.numeric_stats().at("price").stddev,
            m.numeric_stats().at("price").stddev);
}

}  // namespace
}  // namespace recolab
