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

// Pipeline stages behind the command line tool, and the artifact manifest
// that ties their outputs to one configuration.

#ifndef RECOLAB_PIPELINE_H_
#define RECOLAB_PIPELINE_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recolab/config.h"

namespace recolab {

inline constexpr std::string_view kVersion = "0.1.0";

// Artifacts live under the output directory and are recorded in
// <out>/manifest.json with the producing configuration hash and a content
// hash.
class ArtifactStore {
 public:
  ArtifactStore(std::filesystem::path out, std::string config_hash);

  std::filesystem::path Path(std::string_view name) const { return out_ / name; }
  // Records the file as produced by the current configuration.
  void Register(const std::string& name);
  // Path of a registered artifact. Throws Error("missing_artifact") when it
  // is absent and Error("config_mismatch") when it was produced under another
  // configuration or changed since.
  std::filesystem::path Require(const std::string& name) const;
  std::string ContentHash(const std::string& name) const;

 private:
  void Save() const;

  std::filesystem::path out_;
  std::string config_hash_;
  nlohmann::ordered_json manifest_;
};

// ingest, train, eval-offline, pareto, correlate, select, synth-online,
// eval-online, predict-online, report
const std::vector<std::string>& Subcommands();

// Runs one subcommand ("all" runs every stage in order) and writes
// <out>/run_<subcommand>.json. Throws Error on failure.
void RunSubcommand(std::string_view subcommand, const RunConfig& config);

}  // namespace recolab

#endif  // RECOLAB_PIPELINE_H_
