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

// Run configuration: JSON file, RECOLAB_* environment overrides and command
// line flags, resolved into one typed structure.

#ifndef RECOLAB_CONFIG_H_
#define RECOLAB_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recolab/corpus.h"
#include "recolab/embed.h"
#include "recolab/gridlab.h"
#include "recolab/meta_predict.h"
#include "recolab/online_eval.h"
#include "recolab/recommender.h"
#include "recolab/synth.h"

namespace recolab {

struct RunConfig {
  uint64_t seed = 0;
  int jobs = 1;
  bool strict = false;
  bool resume = false;

  std::filesystem::path interactions;
  std::filesystem::path catalog;
  std::filesystem::path schema;
  std::filesystem::path descriptions;
  std::filesystem::path out = "out";

  // Set when the inputs are generated by `ingest`.
  std::optional<WorldSpec> synthetic;
  std::optional<Instant> split_point;

  int min_visits = 2;
  int max_visits = 150;
  VisitCounting counting = VisitCounting::kDistinctItems;

  GridAxes grid;
  TrainSpec train;
  RecommendOptions recommend;
  int k_eval = 5;  // recommendation slots shown online

  SelectOptions select;

  BehaviorSpec online;
  std::optional<Instant> online_start;  // default: day after the last event
  std::string topic_attribute = "tour_type";
  double preference_high = 0.3;
  double preference_low = 0.02;
  OnlineOptions online_eval;

  MetaHyper meta = [] {
    MetaHyper m;
    m.lasso.tol = 1e-6;
    return m;
  }();

  // The resolved configuration as canonical JSON (sorted keys).
  nlohmann::json ToJson() const;
  // FNV-1a over the canonical JSON, excluding `jobs`, `out` and `resume`.
  std::string Hash() const;
  void Validate() const;  // throws Error("config")
};

// Starts from defaults, applies the JSON document, then environment
// variables: RECOLAB_SEED=7 sets "seed", RECOLAB_ONLINE__N_USERS=500 sets
// "online.n_users". Values are parsed as JSON, falling back to a string.
RunConfig ParseConfig(const nlohmann::json& doc,
                      const std::map<std::string, std::string>& env = {});
RunConfig LoadConfig(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& env = {});

// RECOLAB_* variables of the current process.
std::map<std::string, std::string> RecolabEnvironment();

}  // namespace recolab

#endif  // RECOLAB_CONFIG_H_
