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

#include "recolab/config.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/rng.h"

extern char** environ;

namespace recolab {
namespace {

using Json = nlohmann::json;


// Recursively overlays `patch` on `base`. Keys must already exist in `base`
// unless `base` holds null at that position.
void Overlay(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object() || !base.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw Error("config", "unknown key '" + key + "'");
    Overlay(base[it.key()], it.value(), key);
  }
}

Json WorldToJson(const WorldSpec& w) {
  return {{"n_items", w.n_items},
          {"n_users", w.n_users},
          {"n_topics", w.n_topics},
          {"vocab_per_topic", w.vocab_per_topic},
          {"shared_vocab", w.shared_vocab},
          {"description_length", w.description_length},
          {"start", FormatDate(w.start)},
          {"days", w.days},
          {"test_days", w.test_days},
          {"one_visit_fraction", w.one_visit_fraction},
          {"heavy_fraction", w.heavy_fraction},
          {"mean_visits", w.mean_visits},
          {"stay_in_topic", w.stay_in_topic},
          {"purchase_rate", w.purchase_rate}};
}

template <typename T>
T Get(const Json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("config", "bad or missing value for '" + path + "." + key + "'");
  }
}

std::optional<Instant> OptInstant(const Json& j, const std::string& path) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_string()) throw Error("config", "'" + path + "' must be a timestamp string");
  return ParseInstant(j.get<std::string>());
}

}  // namespace

Json RunConfig::ToJson() const {
  Json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["strict"] = strict;
  j["resume"] = resume;
  j["paths"] = {{"interactions", interactions.string()},
                {"catalog", catalog.string()},
                {"schema", schema.string()},
                {"descriptions", descriptions.string()},
                {"out", out.string()}};
  j["synthetic"] = synthetic ? WorldToJson(*synthetic) : Json(nullptr);
  j["split_point"] = split_point ? Json(FormatInstant(*split_point)) : Json(nullptr);
  j["filter"] = {{"min_visits", min_visits},
                 {"max_visits", max_visits},
                 {"counting", counting == VisitCounting::kDistinctItems
                                  ? "distinct_items"
                                  : "raw_events"}};
  Json histories = Json::array();
  for (const auto& h : grid.histories) histories.push_back(h.Id());
  j["grid"] = {{"dims", grid.dims},
               {"windows", grid.windows},
               {"allow_self", grid.allow_self},
               {"families", grid.families},
               {"histories", histories},
               {"novelty", grid.novelty},
               {"diversity", grid.diversity},
               {"lambda_novelty", grid.lambda_novelty},
               {"lambda_diversity", grid.lambda_diversity}};
  j["train"] = {{"epochs", train.epochs},
                {"negatives", train.negatives},
                {"initial_lr", train.initial_lr},
                {"min_lr", train.min_lr},
                {"noise_exponent", train.noise_exponent}};
  j["recommend"] = {{"mmr_depth", recommend.mmr_depth},
                    {"normalize", recommend.normalize}};
  j["k_eval"] = k_eval;
  Json metrics = Json::array();
  for (Metric m : select.metrics) metrics.push_back(std::string(MetricName(m)));
  j["select"] = {{"metrics", metrics},
                 {"budget", select.budget},
                 {"closeness_tol", select.closeness_tol}};
  j["online"] = {
      {"n_users", online.n_users},
      {"first_uid", online.first_uid},
      {"days", online.days},
      {"mean_prior_visits", online.mean_prior_visits},
      {"mean_sessions", online.mean_sessions},
      {"mean_session_visits", online.mean_session_visits},
      {"visit_ratio", online.visit_ratio},
      {"homepage_rate", online.homepage_rate},
      {"start", online_start ? Json(FormatInstant(*online_start)) : Json(nullptr)},
      {"topic_attribute", topic_attribute},
      {"preference_high", preference_high},
      {"preference_low", preference_low},
      {"seniority", online_eval.mode == SeniorityMode::kPerImpression
                        ? "per_impression"
                        : "per_user"},
      {"horizon_days", online_eval.horizon_days ? Json(*online_eval.horizon_days)
                                                : Json(nullptr)}};
  j["meta"] = {{"family", std::string(ModelFamilyName(meta.family))},
               {"poly2", meta.poly2},
               {"lambda", meta.lambda ? Json(*meta.lambda) : Json(nullptr)},
               {"n_lambdas", meta.n_lambdas},
               {"lambda_ratio", meta.lambda_ratio},
               {"tol", meta.lasso.tol},
               {"max_iter", meta.lasso.max_iter},
               {"max_depth", meta.max_depth},
               {"min_leaf", meta.min_leaf}};
  return j;
}

std::string RunConfig::Hash() const {
  Json j = ToJson();
  j.erase("jobs");
  j.erase("resume");
  j["paths"].erase("out");
  return HexDigest(Fnv1a64(j.dump()));
}

void RunConfig::Validate() const {
  if (jobs < 1) throw Error("config", "jobs must be >= 1");
  if (!synthetic) {
    if (!split_point) throw Error("config", "split_point is required");
    for (const auto& [name, p] : {std::pair{"interactions", interactions},
                                  {"catalog", catalog},
                                  {"schema", schema},
                                  {"descriptions", descriptions}}) {
      if (p.empty()) throw Error("config", std::string("paths.") + name + " is required");
      if (!std::filesystem::exists(p)) {
        throw Error("config", std::string("paths.") + name + " does not exist: " + p.string());
      }
    }
  } else {
    synthetic->Validate();
  }
  if (min_visits < 1 || max_visits < min_visits) throw Error("config", "bad filter bounds");
  if (k_eval < 1) throw Error("config", "k_eval must be >= 1");
  if (select.budget < 2) throw Error("config", "select.budget must be >= 2");
  if (select.metrics.empty()) throw Error("config", "select.metrics is empty");
  if (preference_high < 0 || preference_high > 1 || preference_low < 0 ||
      preference_low > 1) {
    throw Error("config", "preferences must lie in [0, 1]");
  }
  train.Validate();
  online.Validate();
}

RunConfig ParseConfig(const Json& doc, const std::map<std::string, std::string>& env) {
  if (!doc.is_object()) throw Error("config", "configuration must be a JSON object");
  Json merged = RunConfig{}.ToJson();
  merged["seed"] = nullptr;

  Json patch = doc;
  for (const auto& [name, value] : env) {
    std::string key = name.substr(std::string("RECOLAB_").size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    Json parsed = Json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    Json* at = &patch;
    size_t start = 0;
    for (;;) {
      const size_t sep = key.find("__", start);
      const std::string part = key.substr(start, sep - start);
      if (sep == std::string::npos) {
        (*at)[part] = parsed;
        break;
      }
      if (!at->contains(part) || !(*at)[part].is_object()) (*at)[part] = Json::object();
      at = &(*at)[part];
      start = sep + 2;
    }
  }
  if (patch.contains("synthetic") && patch["synthetic"].is_object()) {
    merged["synthetic"] = WorldToJson(WorldSpec{});
  }
  Overlay(merged, patch, "");

  RunConfig c;
  if (merged["seed"].is_null()) throw Error("config", "seed is required");
  c.seed = Get<uint64_t>(merged, "seed", "");
  c.jobs = Get<int>(merged, "jobs", "");
  c.strict = Get<bool>(merged, "strict", "");
  c.resume = Get<bool>(merged, "resume", "");

  const Json& paths = merged["paths"];
  c.interactions = Get<std::string>(paths, "interactions", "paths");
  c.catalog = Get<std::string>(paths, "catalog", "paths");
  c.schema = Get<std::string>(paths, "schema", "paths");
  c.descriptions = Get<std::string>(paths, "descriptions", "paths");
  c.out = Get<std::string>(paths, "out", "paths");

  if (merged["synthetic"].is_object()) {
    const Json& s = merged["synthetic"];
    WorldSpec w;
    w.n_items = Get<int>(s, "n_items", "synthetic");
    w.n_users = Get<int>(s, "n_users", "synthetic");
    w.n_topics = Get<int>(s, "n_topics", "synthetic");
    w.vocab_per_topic = Get<int>(s, "vocab_per_topic", "synthetic");
    w.shared_vocab = Get<int>(s, "shared_vocab", "synthetic");
    w.description_length = Get<int>(s, "description_length", "synthetic");
    w.start = ParseDate(Get<std::string>(s, "start", "synthetic"));
    w.days = Get<int>(s, "days", "synthetic");
    w.test_days = Get<int>(s, "test_days", "synthetic");
    w.one_visit_fraction = Get<double>(s, "one_visit_fraction", "synthetic");
    w.heavy_fraction = Get<double>(s, "heavy_fraction", "synthetic");
    w.mean_visits = Get<double>(s, "mean_visits", "synthetic");
    w.stay_in_topic = Get<double>(s, "stay_in_topic", "synthetic");
    w.purchase_rate = Get<double>(s, "purchase_rate", "synthetic");
    w.seed = DeriveSeed(c.seed, 2);
    c.synthetic = w;
  }
  c.split_point = OptInstant(merged["split_point"], "split_point");

  const Json& f = merged["filter"];
  c.min_visits = Get<int>(f, "min_visits", "filter");
  c.max_visits = Get<int>(f, "max_visits", "filter");
  const auto counting = Get<std::string>(f, "counting", "filter");
  if (counting == "distinct_items") {
    c.counting = VisitCounting::kDistinctItems;
  } else if (counting == "raw_events") {
    c.counting = VisitCounting::kRawEvents;
  } else {
    throw Error("config", "filter.counting must be distinct_items or raw_events");
  }

  const Json& g = merged["grid"];
  c.grid.dims = Get<std::vector<int>>(g, "dims", "grid");
  c.grid.windows = Get<std::vector<int>>(g, "windows", "grid");
  c.grid.allow_self = Get<std::vector<bool>>(g, "allow_self", "grid");
  c.grid.families = Get<std::vector<std::string>>(g, "families", "grid");
  c.grid.histories.clear();
  for (const auto& h : Get<std::vector<std::string>>(g, "histories", "grid")) {
    c.grid.histories.push_back(HistoryStrategy::Parse(h));
  }
  c.grid.novelty = Get<std::vector<bool>>(g, "novelty", "grid");
  c.grid.diversity = Get<std::vector<bool>>(g, "diversity", "grid");
  c.grid.lambda_novelty = Get<double>(g, "lambda_novelty", "grid");
  c.grid.lambda_diversity = Get<double>(g, "lambda_diversity", "grid");

  const Json& t = merged["train"];
  c.train.epochs = Get<int>(t, "epochs", "train");
  c.train.negatives = Get<int>(t, "negatives", "train");
  c.train.initial_lr = Get<double>(t, "initial_lr", "train");
  c.train.min_lr = Get<double>(t, "min_lr", "train");
  c.train.noise_exponent = Get<double>(t, "noise_exponent", "train");
  c.train.seed = DeriveSeed(c.seed, 1);

  c.recommend.mmr_depth = Get<int>(merged["recommend"], "mmr_depth", "recommend");
  c.recommend.normalize = Get<bool>(merged["recommend"], "normalize", "recommend");
  c.k_eval = Get<int>(merged, "k_eval", "");

  const Json& sel = merged["select"];
  c.select.metrics.clear();
  for (const auto& name : Get<std::vector<std::string>>(sel, "metrics", "select")) {
    const auto m = ParseMetric(name);
    if (!m) throw Error("config", "unknown metric '" + name + "'");
    c.select.metrics.push_back(*m);
  }
  c.select.budget = Get<int>(sel, "budget", "select");
  c.select.closeness_tol = Get<double>(sel, "closeness_tol", "select");
  c.select.strict = c.strict;

  const Json& o = merged["online"];
  c.online.n_users = Get<int>(o, "n_users", "online");
  c.online.first_uid = Get<uint64_t>(o, "first_uid", "online");
  c.online.days = Get<int>(o, "days", "online");
  c.online.mean_prior_visits = Get<double>(o, "mean_prior_visits", "online");
  c.online.mean_sessions = Get<double>(o, "mean_sessions", "online");
  c.online.mean_session_visits = Get<double>(o, "mean_session_visits", "online");
  c.online.visit_ratio = Get<double>(o, "visit_ratio", "online");
  c.online.homepage_rate = Get<double>(o, "homepage_rate", "online");
  c.online.k = c.k_eval;
  c.online.seed = DeriveSeed(c.seed, 3);
  c.online.jobs = c.jobs;
  c.online_start = OptInstant(o["start"], "online.start");
  c.topic_attribute = Get<std::string>(o, "topic_attribute", "online");
  c.preference_high = Get<double>(o, "preference_high", "online");
  c.preference_low = Get<double>(o, "preference_low", "online");
  const auto seniority = Get<std::string>(o, "seniority", "online");
  if (seniority == "per_impression") {
    c.online_eval.mode = SeniorityMode::kPerImpression;
  } else if (seniority == "per_user") {
    c.online_eval.mode = SeniorityMode::kPerUser;
  } else {
    throw Error("config", "online.seniority must be per_impression or per_user");
  }
  if (!o["horizon_days"].is_null()) {
    c.online_eval.horizon_days = Get<int64_t>(o, "horizon_days", "online");
  }
  c.online_eval.jobs = c.jobs;

  const Json& m = merged["meta"];
  c.meta.family = ParseModelFamily(Get<std::string>(m, "family", "meta"));
  c.meta.poly2 = Get<bool>(m, "poly2", "meta");
  if (!m["lambda"].is_null()) c.meta.lambda = Get<double>(m, "lambda", "meta");
  c.meta.n_lambdas = Get<int>(m, "n_lambdas", "meta");
  c.meta.lambda_ratio = Get<double>(m, "lambda_ratio", "meta");
  c.meta.lasso.tol = Get<double>(m, "tol", "meta");
  c.meta.lasso.max_iter = Get<int>(m, "max_iter", "meta");
  c.meta.max_depth = Get<int>(m, "max_depth", "meta");
  c.meta.min_leaf = Get<int>(m, "min_leaf", "meta");
  c.meta.jobs = c.jobs;
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& env) {
  if (!std::filesystem::exists(path)) {
    throw Error("config", "config file not found: " + path.string());
  }
  const Json doc = Json::parse(ReadFileBytes(path), nullptr, false);
  if (doc.is_discarded()) throw Error("config", path.string() + ": invalid JSON");
  return ParseConfig(doc, env);
}

std::map<std::string, std::string> RecolabEnvironment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (!entry.starts_with("RECOLAB_")) continue;
    const size_t eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

}  // namespace recolab
