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

// Synthetic travel-catalog world and simulated recommendation traffic, used
// in place of a production corpus and a live site.

#ifndef RECOLAB_SYNTH_H_
#define RECOLAB_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "recolab/corpus.h"
#include "recolab/online_eval.h"
#include "recolab/recommender.h"
#include "recolab/timeutil.h"

namespace recolab {

struct WorldSpec {
  int n_items = 200;
  int n_users = 400;
  int n_topics = 4;
  int vocab_per_topic = 40;
  int shared_vocab = 30;
  int description_length = 30;
  Date start = ParseDate("2024-01-01");
  int days = 150;
  int test_days = 45;
  double one_visit_fraction = 0.08;
  double heavy_fraction = 0.01;  // users with more than 150 distinct items
  double mean_visits = 10.0;
  double stay_in_topic = 0.85;
  double purchase_rate = 0.02;
  uint64_t seed = 1;
  void Validate() const;  // throws Error("config")
};

struct SyntheticItem {
  std::string id;
  int topic = 0;
  std::map<std::string, std::string> fields;  // raw CSV cells by column
  std::string description;
};

struct SyntheticWorld {
  CatalogSchema schema;
  std::vector<SyntheticItem> items;  // ascending id
  std::map<std::string, int> user_archetype;
  InteractionLog log;
  Instant split_point;
};

SyntheticWorld GenerateWorld(const WorldSpec& spec);

// interactions.csv, catalog_attributes.csv, schema.json, descriptions.csv
void WriteWorld(const SyntheticWorld& world, const std::filesystem::path& dir);

// Click and visit propensity of every (archetype, item) pair.
struct PreferenceModel {
  int n_archetypes = 0;
  size_t n_items = 0;
  std::vector<double> values;  // row-major, archetype x item
  double operator()(int archetype, int item) const {
    return values[archetype * n_items + item];
  }
};

// `high` for items of the archetype's own topic, `low` elsewhere.
PreferenceModel TopicPreferences(std::span<const int> item_topic, int n_topics,
                                 double high, double low);

// An arm maps the user's profile at `as_of` to a ranked list of item indices.
struct Arm {
  std::string variant_id;
  std::function<std::vector<int>(std::span<const IndexedVisit>, Instant)> recommend;
};

// Wraps a variant; empty profiles get the popularity ranking.
Arm VariantArm(const VariantConfig& variant, const RecContext& context,
               std::vector<double> popularity, int k);

struct BehaviorSpec {
  int n_users = 1000;
  uint64_t first_uid = 1000000;
  Instant start = ToInstant(ParseDate("2024-06-01"));
  int days = 30;
  int k = 5;
  double mean_prior_visits = 4.0;  // organic visits before the period
  double mean_sessions = 3.0;
  double mean_session_visits = 3.0;
  double visit_ratio = 0.5;  // later visit probability per unit propensity
  double homepage_rate = 0.0;  // impressions shown before any visit
  uint64_t seed = 1;
  int jobs = 1;
  void Validate() const;  // throws Error("config")
};

struct BehaviorLogs {
  InteractionLog interactions;  // detail views (including click-throughs)
  std::vector<Impression> impressions;
  std::vector<Click> clicks;
};

// Each user is served by arm AssignBucket(uid, arms.size()). Navigation and
// landing visits follow the propensities; every shown item is clicked with
// its propensity and a click always produces a detail view. Users whose
// propensities are all zero make a single uniform landing visit and leave.
BehaviorLogs SimulateBehavior(const std::vector<std::string>& item_ids,
                              const PreferenceModel& preferences,
                              const std::vector<Arm>& arms,
                              const BehaviorSpec& spec);

}  // namespace recolab

#endif  // RECOLAB_SYNTH_H_
