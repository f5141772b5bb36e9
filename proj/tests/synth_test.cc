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

#include <algorithm>
#include <chrono>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "recolab/common.h"
#include "recolab/corpus.h"
#include "recolab/csv.h"
#include "recolab/online_eval.h"
#include "recolab/synth.h"
#include "test_util.h"
#include "topic_arms.h"

namespace recolab {
namespace {

using testing::PaddedIds;
using testing::RoundRobinTopics;
using testing::TopicArm;

WorldSpec SmallSpec(uint64_t seed) {
  WorldSpec spec;
  spec.n_items = 60;
  spec.n_users = 80;
  spec.n_topics = 3;
  spec.seed = seed;
  return spec;
}

TEST(WorldTest, ShapeAndRanges) {
  const auto spec = SmallSpec(1);
  const auto world = GenerateWorld(spec);
  ASSERT_EQ(world.items.size(), 60u);
  EXPECT_TRUE(std::is_sorted(world.items.begin(), world.items.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));
  EXPECT_EQ(world.user_archetype.size(), 80u);
  const Instant begin = ToInstant(spec.start);
  const Instant end = begin + std::chrono::days(spec.days);
  EXPECT_EQ(world.split_point, end - std::chrono::days(spec.test_days));
  ASSERT_FALSE(world.log.empty());
  EXPECT_TRUE(std::is_sorted(world.log.events.begin(), world.log.events.end(),
                             [](const auto& a, const auto& b) {
                               return a.timestamp < b.timestamp;
                             }));
  std::set<std::string> ids;
  for (const auto& item : world.items) {
    ids.insert(item.id);
    EXPECT_GE(item.topic, 0);
    EXPECT_LT(item.topic, 3);
  }
  size_t before = 0, after = 0;
  for (const auto& e : world.log.events) {
    EXPECT_TRUE(ids.contains(e.item_id));
    EXPECT_GE(e.timestamp, begin);
    EXPECT_LT(e.timestamp, end);
    (e.timestamp < world.split_point ? before : after) += 1;
  }
  EXPECT_GT(before, 0u);
  EXPECT_GT(after, 0u);
}

TEST(WorldTest, DeterministicForSeed) {
  const auto a = GenerateWorld(SmallSpec(4));
  const auto b = GenerateWorld(SmallSpec(4));
  const auto c = GenerateWorld(SmallSpec(5));
  EXPECT_EQ(a.log.events, b.log.events);
  EXPECT_NE(a.log.events, c.log.events);
}

TEST(WorldTest, WrittenFilesLoad) {
  testing::TempDir dir("world");
  const auto world = GenerateWorld(SmallSpec(2));
  WriteWorld(world, dir.path());
  const auto log = LoadInteractions(dir / "interactions.csv", true);
  EXPECT_EQ(log.events, world.log.events);
  const Catalog cat = LoadCatalog(dir / "catalog_attributes.csv", dir / "schema.json",
                                  dir / "descriptions.csv");
  EXPECT_EQ(cat.size(), world.items.size());
  size_t with_text = 0;
  for (size_t i = 0; i < cat.size(); ++i) {
    with_text += cat.item(static_cast<int>(i)).description_tokens.empty() ? 0 : 1;
  }
  EXPECT_EQ(with_text, cat.size());
  EXPECT_FALSE(cat.schema().attributes.empty());
}

TEST(WorldTest, Validation) {
  auto spec = SmallSpec(1);
  spec.test_days = spec.days;
  EXPECT_THROW(spec.Validate(), Error);
  spec = SmallSpec(1);
  spec.n_topics = 0;
  EXPECT_THROW(GenerateWorld(spec), Error);
}

TEST(TopicPreferencesTest, HighOnOwnTopic) {
  const auto topic = RoundRobinTopics(6, 3);
  const auto p = TopicPreferences(topic, 3, 0.3, 0.02);
  EXPECT_EQ(p.n_archetypes, 3);
  EXPECT_EQ(p(1, 1), 0.3);
  EXPECT_EQ(p(1, 4), 0.3);
  EXPECT_EQ(p(1, 2), 0.02);
}

BehaviorSpec SmallBehavior(uint64_t seed, int n_users) {
  BehaviorSpec spec;
  spec.n_users = n_users;
  spec.first_uid = 500;
  spec.days = 10;
  spec.seed = seed;
  return spec;
}

std::vector<Arm> TwoArms(const std::vector<int>& topic, int n_topics) {
  return {TopicArm("aligned", topic, n_topics, 0, 5),
          TopicArm("anti", topic, n_topics, 1, 5)};
}

TEST(SimulateBehaviorTest, ZeroPropensityMeansNoEngagement) {
  const auto topic = RoundRobinTopics(40, 4);
  const auto prefs = TopicPreferences(topic, 4, 0.0, 0.0);
  const auto logs =
      SimulateBehavior(PaddedIds(40), prefs, TwoArms(topic, 4), SmallBehavior(3, 200));
  EXPECT_TRUE(logs.clicks.empty());
  EXPECT_EQ(logs.interactions.size(), 200u);  // one landing visit each
  const auto r = EvaluateOnline(logs.impressions, logs.clicks, logs.interactions);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.clicks, 0u);
    EXPECT_EQ(row.visits, 0u);
  }
}

TEST(SimulateBehaviorTest, SameSeedSameBytes) {
  const auto topic = RoundRobinTopics(40, 4);
  const auto prefs = TopicPreferences(topic, 4, 0.3, 0.02);
  const auto arms = TwoArms(topic, 4);
  auto spec = SmallBehavior(9, 150);
  const auto a = SimulateBehavior(PaddedIds(40), prefs, arms, spec);
  spec.jobs = 3;
  const auto b = SimulateBehavior(PaddedIds(40), prefs, arms, spec);
  testing::TempDir dir("behavior");
  WriteImpressions(a.impressions, dir / "a.csv");
  WriteImpressions(b.impressions, dir / "b.csv");
  EXPECT_EQ(ReadFileBytes(dir / "a.csv"), ReadFileBytes(dir / "b.csv"));
  EXPECT_EQ(a.clicks, b.clicks);
  EXPECT_EQ(a.interactions.events, b.interactions.events);
  spec.seed = 10;
  EXPECT_NE(SimulateBehavior(PaddedIds(40), prefs, arms, spec).impressions, a.impressions);
}

TEST(SimulateBehaviorTest, LogInvariants) {
  const auto topic = RoundRobinTopics(40, 4);
  const auto prefs = TopicPreferences(topic, 4, 0.3, 0.02);
  const auto arms = TwoArms(topic, 4);
  const auto spec = SmallBehavior(21, 300);
  const auto logs = SimulateBehavior(PaddedIds(40), prefs, arms, spec);
  ASSERT_FALSE(logs.impressions.empty());
  ASSERT_FALSE(logs.clicks.empty());
  std::set<std::tuple<std::string, std::string, Instant>> views;
  for (const auto& e : logs.interactions.events) {
    views.insert({e.user_id, e.item_id, e.timestamp});
  }
  for (const auto& c : logs.clicks) {
    EXPECT_TRUE(views.contains({c.user_id, c.item_id, c.timestamp}));
  }
  // Sessions start inside the period; their tail may run a little past it.
  const Instant end = spec.start + std::chrono::days(spec.days + 1);
  for (const auto& imp : logs.impressions) {
    EXPECT_EQ(imp.variant_id, arms[AssignBucket(imp.user_id, 2)].variant_id);
    EXPECT_GE(imp.timestamp, spec.start);
    EXPECT_LT(imp.timestamp, end);
  }
  const auto r = EvaluateOnline(logs.impressions, logs.clicks, logs.interactions);
  EXPECT_EQ(r.stats.dropped_clicks, 0u);
  for (const auto& row : r.rows) EXPECT_GE(row.vrr, row.ctr);
}

TEST(SimulateBehaviorTest, AlignedArmWins) {
  const auto topic = RoundRobinTopics(40, 4);
  const auto prefs = TopicPreferences(topic, 4, 0.3, 0.02);
  const auto logs = SimulateBehavior(PaddedIds(40), prefs, TwoArms(topic, 4),
                                     SmallBehavior(5, 2000));
  const auto r = EvaluateOnline(logs.impressions, logs.clicks, logs.interactions);
  double aligned = 0, anti = 0;
  for (const auto& row : r.rows) {
    if (row.segment != Segment::kAll) continue;
    (row.variant_id == "aligned" ? aligned : anti) = row.ctr;
  }
  EXPECT_GT(aligned, 2 * anti);
}

TEST(BehaviorSpecTest, Validation) {
  BehaviorSpec spec;
  spec.k = 0;
  EXPECT_THROW(spec.Validate(), Error);
  spec = BehaviorSpec{};
  spec.homepage_rate = 1.5;
  EXPECT_THROW(spec.Validate(), Error);
  EXPECT_NO_THROW(BehaviorSpec{}.Validate());
}

}  // namespace
}  // namespace recolab
