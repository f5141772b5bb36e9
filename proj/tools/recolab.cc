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

// recolab: command line front end for the evaluation pipeline.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "recolab/common.h"
#include "recolab/config.h"
#include "recolab/pipeline.h"

namespace {

int Fail(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline/online recommender evaluation pipeline"};
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> metrics;
  std::optional<double> tol;
  std::optional<int> budget;
  bool strict = false;
  bool resume = false;

  std::string names;
  for (const auto& s : recolab::Subcommands()) names += (names.empty() ? "" : ", ") + s;
  app.add_option("subcommand", subcommand, names + ", or all")->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--metrics", metrics, "comma-separated metrics for pareto/select");
  app.add_option("--tol", tol, "closeness tolerance for select");
  app.add_option("--budget", budget, "candidate budget for select");
  app.add_flag("--strict", strict, "fail on malformed input and tight budgets");
  app.add_flag("--resume", resume, "reuse cached per-variant offline reports");
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json doc;
    {
      std::ifstream in(config_path);
      if (!in) return Fail("config", "cannot read " + config_path);
      doc = nlohmann::json::parse(in, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        return Fail("config", config_path + ": invalid JSON");
      }
    }
    if (out) doc["paths"]["out"] = *out;
    if (seed) doc["seed"] = *seed;
    if (jobs) doc["jobs"] = *jobs;
    if (strict) doc["strict"] = true;
    if (resume) doc["resume"] = true;
    if (metrics) {
      std::vector<std::string> list;
      std::stringstream ss(*metrics);
      for (std::string m; std::getline(ss, m, ',');) {
        if (!m.empty()) list.push_back(m);
      }
      doc["select"]["metrics"] = list;
    }
    if (tol) doc["select"]["closeness_tol"] = *tol;
    if (budget) doc["select"]["budget"] = *budget;

    const recolab::RunConfig config =
        recolab::ParseConfig(doc, recolab::RecolabEnvironment());
    recolab::RunSubcommand(subcommand, config);
  } catch (const recolab::Error& e) {
    return Fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return Fail("internal", e.what());
  }
  return 0;
}
