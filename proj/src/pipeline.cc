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

#include "recolab/pipeline.h"

#include <algorithm>
#include <map>
#include <set>

#include "recolab/cbsim.h"
#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/embed.h"
#include "recolab/gridlab.h"
#include "recolab/meta_predict.h"
#include "recolab/offline_metrics.h"
#include "recolab/online_eval.h"
#include "recolab/parallel.h"
#include "recolab/rng.h"
#include "recolab/synth.h"

namespace recolab {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kInteractions = "input/interactions.csv";
constexpr const char* kAttributes = "input/catalog_attributes.csv";
constexpr const char* kSchema = "input/schema.json";
constexpr const char* kDescriptions = "input/descriptions.csv";
constexpr const char* kTrain = "train.csv";
constexpr const char* kTest = "test.csv";
constexpr const char* kSplit = "split.json";
constexpr const char* kCbMatrix = "models/cb_matrix.csv";
constexpr const char* kCbManifest = "models/cb_matrix.json";
constexpr const char* kOffline = "offline_report.csv";
constexpr const char* kCandidates = "candidates.csv";
constexpr const char* kImpressions = "impressions.csv";
constexpr const char* kClicks = "clicks.csv";
constexpr const char* kOnlineLog = "online_interactions.csv";
constexpr const char* kOnline = "online_report.csv";
constexpr const char* kMetaData = "meta_dataset.csv";

const std::vector<Segment> kMetaSegments = {Segment::kS1_2, Segment::kS3_5,
                                            Segment::kS6_15};

std::string Hex(std::string_view bytes) { return HexDigest(Fnv1a64(bytes)); }

// Shared state of one stage run.
struct Stage {
  const RunConfig& config;
  ArtifactStore& store;
  Json stats = Json::object();
  std::vector<std::string> produced;

  void Produced(const std::string& name) {
    store.Register(name);
    produced.push_back(name);
  }
};

Catalog LoadStoredCatalog(const ArtifactStore& store) {
  return LoadCatalog(store.Require(kAttributes), store.Require(kSchema),
                     store.Require(kDescriptions));
}

SplitCorpus LoadStoredSplit(const ArtifactStore& store) {
  SplitCorpus split;
  split.train = LoadInteractions(store.Require(kTrain), true);
  split.test = LoadInteractions(store.Require(kTest), true);
  const auto j = nlohmann::json::parse(ReadFileBytes(store.Require(kSplit)));
  split.split_point = ParseInstant(j.at("split_point").get<std::string>());
  return split;
}

std::string ModelName(EmbeddingKind kind, int dim, int window, const char* ext) {
  return "models/" + EmbeddingFileStem(kind, dim, window) + ext;
}

bool HasFamily(const GridAxes& axes, std::string_view f) {
  return std::find(axes.families.begin(), axes.families.end(), f) != axes.families.end();
}

ModelSet LoadModelSet(const RunConfig& config, const ArtifactStore& store,
                      const Catalog& catalog) {
  const size_t n = catalog.size();
  const auto cb = AttributeMatrix::Load(store.Require(kCbMatrix), store.Require(kCbManifest));
  if (cb.item_ids() != catalog.ids()) {
    throw Error("config_mismatch", "attribute matrix does not match the catalog");
  }
  std::vector<double> cb_rows;
  std::vector<bool> cb_cold(n);
  for (size_t i = 0; i < n; ++i) {
    const auto r = cb.row(i);
    cb_rows.insert(cb_rows.end(), r.begin(), r.end());
    cb_cold[i] = std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
  }
  ModelSet models;
  models.diversity_sim = CosineSimilarityMatrix(cb_rows, n, cb.width());

  const auto bases = EnumerateBases(config.grid);
  std::vector<BaseModel> loaded(bases.size());
  ParallelFor(bases.size(), config.jobs, [&](size_t b) {
    const BaseSpec& spec = bases[b];
    BaseModel model{spec, {}, {}};
    if (spec.kind == BaseKind::kCosine) {
      model.sim = CosineSimilarityMatrix(cb_rows, n, cb.width(), spec.allow_self ? 1.0 : 0.0);
      model.cold = cb_cold;
    } else {
      const auto kind = spec.kind == BaseKind::kWord2Vec ? EmbeddingKind::kSessionW2v
                                                         : EmbeddingKind::kDocD2v;
      store.Require(ModelName(kind, spec.dim, spec.window, ".csv"));
      const auto emb = LoadEmbeddings(store.Path("models"), kind, spec.dim, spec.window);
      if (emb.item_ids != catalog.ids()) {
        throw Error("config_mismatch", spec.Id() + " does not match the catalog");
      }
      model.sim = CosineSimilarityMatrix(emb.vectors, n, static_cast<size_t>(spec.dim));
      model.cold = emb.cold;
    }
    loaded[b] = std::move(model);
  });
  for (auto& m : loaded) {
    const std::string id = m.spec.Id();
    models.bases.emplace(id, std::move(m));
  }
  return models;
}

VariantConfig ParseVariant(const RunConfig& config, const std::string& id) {
  VariantConfig v = VariantConfig::Parse(id);
  v.lambda_novelty = config.grid.lambda_novelty;
  v.lambda_diversity = config.grid.lambda_diversity;
  return v;
}

std::vector<OfflineReport> LoadStoredOffline(const ArtifactStore& store) {
  return LoadOfflineReports(store.Require(kOffline));
}

// ---------------------------------------------------------------------------
// Stages

void Ingest(Stage& s) {
  const RunConfig& c = s.config;
  std::optional<Instant> split_point = c.split_point;
  if (c.synthetic) {
    const SyntheticWorld world = GenerateWorld(*c.synthetic);
    WriteWorld(world, s.store.Path("input"));
    if (!split_point) split_point = world.split_point;
    s.stats["synthetic_users"] = world.user_archetype.size();
    s.stats["synthetic_items"] = world.items.size();
  } else {
    std::filesystem::create_directories(s.store.Path("input"));
    for (const auto& [from, to] : {std::pair{c.interactions, kInteractions},
                                   {c.catalog, kAttributes},
                                   {c.schema, kSchema},
                                   {c.descriptions, kDescriptions}}) {
      WriteFileBytes(s.store.Path(to), ReadFileBytes(from));
    }
  }
  for (const char* name : {kInteractions, kAttributes, kSchema, kDescriptions}) {
    s.Produced(name);
  }

  LoadStats load;
  InteractionLog log = LoadInteractions(s.store.Path(kInteractions), c.strict, &load);
  size_t duplicates = 0;
  NormalizeLog(log, &duplicates);
  const Catalog catalog = LoadStoredCatalog(s.store);
  const InteractionLog filtered = FilterUsers(log, c.min_visits, c.max_visits, c.counting);
  const SplitCorpus split = TemporalSplit(filtered, *split_point);
  WriteInteractions(split.train, s.store.Path(kTrain));
  WriteInteractions(split.test, s.store.Path(kTest));
  WriteFileBytes(s.store.Path(kSplit),
                 Json{{"split_point", FormatInstant(split.split_point)}}.dump(2) + "\n");
  for (const char* name : {kTrain, kTest, kSplit}) s.Produced(name);

  std::set<std::string> users_before, users_after;
  for (const auto& e : log.events) users_before.insert(e.user_id);
  for (const auto& e : filtered.events) users_after.insert(e.user_id);
  s.stats["rows"] = load.rows;
  s.stats["malformed"] = load.malformed;
  s.stats["duplicates"] = load.duplicates + duplicates;
  s.stats["items"] = catalog.size();
  s.stats["users"] = users_before.size();
  s.stats["users_after_filter"] = users_after.size();
  s.stats["train_events"] = split.train.size();
  s.stats["test_events"] = split.test.size();
  s.stats["dropped_test_events"] = split.dropped_test_events;
  s.stats["dropped_test_users"] = split.dropped_test_users;
}

void Train(Stage& s) {
  const RunConfig& c = s.config;
  const Catalog catalog = LoadStoredCatalog(s.store);
  const InteractionLog train = LoadInteractions(s.store.Require(kTrain), true);
  const std::string corpus_hash = s.store.ContentHash(kTrain);

  const AttributeMatrix cb = VectorizeAttributes(catalog);
  cb.Save(s.store.Path(kCbMatrix), s.store.Path(kCbManifest));
  s.Produced(kCbMatrix);
  s.Produced(kCbManifest);
  s.stats["cb_columns"] = cb.width();
  s.stats["cb_warnings"] = cb.warnings;

  struct Job {
    EmbeddingKind kind;
    int dim;
    int window;
  };
  std::vector<Job> jobs;
  for (const auto& [family, kind] : {std::pair{"w2v", EmbeddingKind::kSessionW2v},
                                     std::pair{"d2v", EmbeddingKind::kDocD2v}}) {
    if (!HasFamily(c.grid, family)) continue;
    for (int d : c.grid.dims) {
      for (int w : c.grid.windows) jobs.push_back({kind, d, w});
    }
  }
  std::vector<double> losses(jobs.size());
  std::vector<size_t> cold(jobs.size());
  ParallelFor(jobs.size(), c.jobs, [&](size_t i) {
    const Job& job = jobs[i];
    TrainSpec spec = c.train;
    spec.seed = DeriveSeed(c.train.seed, i);
    const EmbeddingModel model =
        job.kind == EmbeddingKind::kSessionW2v
            ? FitSessionEmbeddings(train, catalog, job.dim, job.window, spec)
            : FitDocEmbeddings(catalog, job.dim, job.window, spec);
    SaveEmbeddings(model, spec, corpus_hash, s.store.Path("models"));
    losses[i] = model.final_loss;
    cold[i] = static_cast<size_t>(std::count(model.cold.begin(), model.cold.end(), true));
  });
  Json models = Json::object();
  for (size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    s.Produced(ModelName(job.kind, job.dim, job.window, ".csv"));
    s.Produced(ModelName(job.kind, job.dim, job.window, ".json"));
    models[EmbeddingFileStem(job.kind, job.dim, job.window)] = {
        {"final_loss", losses[i]}, {"cold_items", cold[i]}};
  }
  s.stats["models"] = models;
}

void EvalOffline(Stage& s) {
  const RunConfig& c = s.config;
  const Catalog catalog = LoadStoredCatalog(s.store);
  const SplitCorpus split = LoadStoredSplit(s.store);
  const ModelSet models = LoadModelSet(c, s.store, catalog);
  const EvaluationSet eval = BuildEvaluationSet(split, catalog);
  GridOptions options;
  options.jobs = c.jobs;
  options.recommend = c.recommend;
  if (c.resume) options.resume_dir = s.store.Path("cache/offline_" + c.Hash());
  const auto variants = EnumerateVariants(c.grid);
  const auto reports = RunGrid(variants, eval, models, options);
  WriteOfflineReports(reports, s.store.Path(kOffline));
  s.Produced(kOffline);
  s.stats["variants"] = variants.size();
  s.stats["users"] = eval.users.size();
  s.stats["skipped_no_relevant"] = eval.skipped_no_relevant;
  s.stats["fallback_users"] = reports.empty() ? 0 : reports.front().fallback_users;
}

void Pareto(Stage& s) {
  const auto reports = LoadStoredOffline(s.store);
  const auto& metrics = s.config.select.metrics;
  const auto front = ParetoFront(reports, metrics);
  std::map<std::string, const OfflineReport*> by_id;
  for (const auto& r : reports) by_id[r.variant_id] = &r;
  CsvWriter out(s.store.Path("pareto.csv"));
  std::vector<std::string> row{"variant_id"};
  for (Metric m : metrics) row.emplace_back(MetricName(m));
  out.Row(row);
  for (const auto& id : front) {
    row.assign(1, id);
    for (Metric m : metrics) row.push_back(FormatDouble(by_id[id]->Get(m)));
    out.Row(row);
  }
  out.Close();
  s.Produced("pareto.csv");
  s.stats["front_size"] = front.size();
}

void Correlate(Stage& s) {
  const auto reports = LoadStoredOffline(s.store);
  for (auto [method, name] : {std::pair{CorrelationMethod::kSpearman, "spearman"},
                              std::pair{CorrelationMethod::kPearson, "pearson"}}) {
    const auto matrix = ComputeCorrelationMatrix(reports, method);
    const std::string file = std::string("correlations_") + name + ".csv";
    WriteCorrelationMatrix(matrix, s.store.Path(file));
    s.Produced(file);
    if (method == CorrelationMethod::kSpearman) {
      CsvWriter out(s.store.Path("clusters.csv"));
      out.Row({"cluster", "metric"});
      const auto clusters = ClusterMetrics(matrix);
      for (size_t i = 0; i < clusters.size(); ++i) {
        for (Metric m : clusters[i]) out.Row({std::to_string(i + 1), std::string(MetricName(m))});
      }
      out.Close();
      s.Produced("clusters.csv");
      s.stats["clusters"] = clusters.size();
    }
  }
}

void Select(Stage& s) {
  const auto reports = LoadStoredOffline(s.store);
  const auto candidates = SelectCandidates(reports, s.config.select);
  WriteCandidates(candidates, s.store.Path(kCandidates));
  s.Produced(kCandidates);
  s.stats["candidates"] = candidates.size();
}

void SynthOnline(Stage& s) {
  const RunConfig& c = s.config;
  const Catalog catalog = LoadStoredCatalog(s.store);
  const SplitCorpus split = LoadStoredSplit(s.store);
  const ModelSet models = LoadModelSet(c, s.store, catalog);
  const auto candidates = LoadCandidates(s.store.Require(kCandidates));
  if (candidates.empty()) throw Error("no_candidates", "candidates.csv is empty");

  std::vector<double> popularity(catalog.size(), 0.0);
  Instant last = split.split_point;
  for (const auto* log : {&split.train, &split.test}) {
    for (const auto& e : log->events) {
      last = std::max(last, e.timestamp);
      if (e.kind != EventKind::kDetailView) continue;
      if (auto idx = catalog.IndexOf(e.item_id)) popularity[*idx] += 1.0;
    }
  }
  BehaviorSpec spec = c.online;
  spec.start = c.online_start
                   ? *c.online_start
                   : ToInstant(std::chrono::floor<std::chrono::days>(last) +
                               std::chrono::days(1));

  // Archetypes are the values of the topic attribute.
  std::vector<std::string> values;
  for (size_t i = 0; i < catalog.size(); ++i) {
    const auto& nominal = catalog.item(static_cast<int>(i)).nominal;
    auto it = nominal.find(c.topic_attribute);
    if (it == nominal.end()) {
      throw Error("config", "catalog has no nominal attribute '" + c.topic_attribute + "'");
    }
    values.push_back(it->second);
  }
  std::vector<std::string> archetypes(values);
  std::sort(archetypes.begin(), archetypes.end());
  archetypes.erase(std::unique(archetypes.begin(), archetypes.end()), archetypes.end());
  std::vector<int> topic(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    topic[i] = static_cast<int>(std::lower_bound(archetypes.begin(), archetypes.end(), values[i]) -
                                archetypes.begin());
  }
  const PreferenceModel prefs = TopicPreferences(
      topic, static_cast<int>(archetypes.size()), c.preference_high, c.preference_low);

  const std::vector<double> novelty = ItemNovelty(catalog, spec.start);
  const RecContext context{&models, novelty, c.recommend};
  std::vector<Arm> arms;
  for (const auto& cand : candidates) {
    arms.push_back(VariantArm(ParseVariant(c, cand.variant_id), context, popularity, c.k_eval));
  }
  const BehaviorLogs logs = SimulateBehavior(catalog.ids(), prefs, arms, spec);
  WriteImpressions(logs.impressions, s.store.Path(kImpressions));
  WriteImpressions(logs.clicks, s.store.Path(kClicks));
  WriteInteractions(logs.interactions, s.store.Path(kOnlineLog));
  for (const char* name : {kImpressions, kClicks, kOnlineLog}) s.Produced(name);
  s.stats["arms"] = arms.size();
  s.stats["start"] = FormatInstant(spec.start);
  s.stats["impressions"] = logs.impressions.size();
  s.stats["clicks"] = logs.clicks.size();
  s.stats["visits"] = logs.interactions.size();
}

void EvalOnline(Stage& s) {
  const RunConfig& c = s.config;
  const auto impressions = LoadImpressions(s.store.Require(kImpressions));
  const auto clicks = LoadImpressions(s.store.Require(kClicks));
  const auto log = LoadInteractions(s.store.Require(kOnlineLog), true);
  const OnlineResult result = EvaluateOnline(impressions, clicks, log, c.online_eval);
  WriteOnlineReports(result.rows, s.store.Path(kOnline));
  s.Produced(kOnline);
  s.stats["impressions"] = result.stats.impressions;
  s.stats["excluded_impressions"] = result.stats.excluded_impressions;
  s.stats["clicks"] = result.stats.clicks;
  s.stats["dropped_clicks"] = result.stats.dropped_clicks;
  s.stats["visits"] = result.stats.visits;
  s.stats["credited_visits"] = result.stats.credited_visits;

  const auto offline = LoadStoredOffline(s.store);
  std::vector<OnlineCorrelation> rows;
  Json skipped = Json::array();
  for (Segment seg : kSegments) {
    try {
      const auto part = OfflineOnlineCorrelation(offline, result.rows, seg);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const Error& e) {
      if (e.code() != "too_few_arms") throw;
      skipped.push_back(std::string(SegmentName(seg)));
    }
  }
  WriteOnlineCorrelations(rows, s.store.Path("online_correlations.csv"));
  s.Produced("online_correlations.csv");
  s.stats["correlation_segments_skipped"] = skipped;
}

void PredictOnline(Stage& s) {
  const RunConfig& c = s.config;
  const auto offline = LoadStoredOffline(s.store);
  const auto online = LoadOnlineReports(s.store.Require(kOnline));
  const MetaDataset data = BuildMetaDataset(offline, online, kMetaSegments);
  WriteMetaDataset(data, s.store.Path(kMetaData));
  s.Produced(kMetaData);
  s.stats["rows"] = data.rows.size();
  if (data.rows.size() < 3) {
    throw Error("too_few_rows", "meta dataset has " + std::to_string(data.rows.size()) +
                                    " rows; need >= 3");
  }
  const Matrix x = data.Features();
  for (const char* target : {"ctr", "vrr"}) {
    const Vector y = data.Target(target);
    const Vector pred = Loocv(x, y, data.feature_names, c.meta);
    const std::vector<double> yv(y.data(), y.data() + y.size());
    const std::vector<double> pv(pred.data(), pred.data() + pred.size());
    const PredictionScore score = ScorePredictions(yv, pv);
    const MetaModel model = FitMetaModel(x, y, data.feature_names, c.meta);
    const std::string model_file = std::string("meta_model_") + target + ".json";
    WriteMetaModel(model, score, s.store.Path(model_file));
    s.Produced(model_file);

    std::vector<RankedVariant> ranked;
    for (Segment seg : kMetaSegments) {
      const auto part = RankAllVariants(model, offline, seg);
      ranked.insert(ranked.end(), part.begin(), part.end());
    }
    const std::string grid_file = std::string("predicted_grid_") + target + ".csv";
    WriteRankedVariants(ranked, s.store.Path(grid_file));
    s.Produced(grid_file);
    s.stats[target] = {{"loocv_r2", score.r2.value},
                       {"r2_degenerate", score.r2.degenerate},
                       {"tau_b", score.kendall.tau_b},
                       {"p_value", score.kendall.p_value},
                       {"lambda", model.lambda},
                       {"nonzero", (model.beta.array() != 0.0).count()}};
  }
}

void Report(Stage& s) {
  const auto offline = LoadStoredOffline(s.store);
  std::map<std::string, const OnlineReport*> online;
  std::vector<OnlineReport> online_rows;
  if (std::filesystem::exists(s.store.Path(kOnline))) {
    online_rows = LoadOnlineReports(s.store.Require(kOnline));
    for (const auto& r : online_rows) {
      if (r.segment == Segment::kAll) online[r.variant_id] = &r;
    }
  }
  // predicted[target][segment][variant]
  std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> predicted;
  for (const char* target : {"ctr", "vrr"}) {
    const std::string file = std::string("predicted_grid_") + target + ".csv";
    if (!std::filesystem::exists(s.store.Path(file))) continue;
    auto in = OpenForRead(s.store.Require(file));
    CsvReader reader(in);
    std::vector<std::string> row;
    reader.Next(row);
    while (reader.Next(row)) {
      if (row.size() == 4) predicted[target][row[0]][row[2]] = row[3];
    }
  }
  CsvWriter out(s.store.Path("summary.csv"));
  std::vector<std::string> header{"variant_id"};
  for (auto name : kMetricNames) header.emplace_back(name);
  header.insert(header.end(), {"online_impressions", "online_ctr", "online_vrr"});
  for (const char* target : {"ctr", "vrr"}) {
    for (Segment seg : kMetaSegments) {
      header.push_back(std::string("pred_") + target + "_" + std::string(SegmentName(seg)));
    }
  }
  out.Row(header);
  for (const auto& r : offline) {
    std::vector<std::string> row{r.variant_id};
    for (double v : r.means) row.push_back(FormatDouble(v));
    if (auto it = online.find(r.variant_id); it != online.end()) {
      row.push_back(std::to_string(it->second->impressions));
      row.push_back(FormatDouble(it->second->ctr));
      row.push_back(FormatDouble(it->second->vrr));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    for (const char* target : {"ctr", "vrr"}) {
      for (Segment seg : kMetaSegments) {
        const auto& table = predicted[target][std::string(SegmentName(seg))];
        auto it = table.find(r.variant_id);
        row.push_back(it == table.end() ? "" : it->second);
      }
    }
    out.Row(row);
  }
  out.Close();
  s.Produced("summary.csv");
  s.stats["variants"] = offline.size();
  s.stats["with_online"] = online.size();
}

using StageFn = void (*)(Stage&);

const std::vector<std::pair<std::string, StageFn>>& StageTable() {
  static const std::vector<std::pair<std::string, StageFn>> table = {
      {"ingest", Ingest},
      {"train", Train},
      {"eval-offline", EvalOffline},
      {"pareto", Pareto},
      {"correlate", Correlate},
      {"select", Select},
      {"synth-online", SynthOnline},
      {"eval-online", EvalOnline},
      {"predict-online", PredictOnline},
      {"report", Report}};
  return table;
}

}  // namespace

ArtifactStore::ArtifactStore(std::filesystem::path out, std::string config_hash)
    : out_(std::move(out)), config_hash_(std::move(config_hash)) {
  const auto path = out_ / "manifest.json";
  if (std::filesystem::exists(path)) {
    manifest_ = Json::parse(ReadFileBytes(path), nullptr, false);
    if (manifest_.is_discarded() || !manifest_.is_object()) {
      throw Error("schema", path.string() + ": unreadable manifest");
    }
  }
  if (!manifest_.contains("artifacts")) manifest_["artifacts"] = Json::object();
}

void ArtifactStore::Register(const std::string& name) {
  manifest_["artifacts"][name] = {{"config_hash", config_hash_},
                                  {"content_hash", Hex(ReadFileBytes(Path(name)))}};
  Save();
}

std::filesystem::path ArtifactStore::Require(const std::string& name) const {
  const auto path = Path(name);
  const auto& artifacts = manifest_["artifacts"];
  if (!artifacts.contains(name) || !std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing artifact '" + name +
                                        "'; run the producing stage first");
  }
  const auto& entry = artifacts[name];
  if (entry["config_hash"] != config_hash_) {
    throw Error("config_mismatch", "artifact '" + name + "' was produced by config " +
                                       entry["config_hash"].get<std::string>() +
                                       ", current config is " + config_hash_);
  }
  if (entry["content_hash"] != Hex(ReadFileBytes(path))) {
    throw Error("config_mismatch", "artifact '" + name + "' changed since it was produced");
  }
  return path;
}

std::string ArtifactStore::ContentHash(const std::string& name) const {
  Require(name);
  return manifest_["artifacts"][name]["content_hash"].get<std::string>();
}

void ArtifactStore::Save() const {
  WriteFileBytes(out_ / "manifest.json", manifest_.dump(2) + "\n");
}

const std::vector<std::string>& Subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : StageTable()) v.push_back(name);
    return v;
  }();
  return names;
}

void RunSubcommand(std::string_view subcommand, const RunConfig& config) {
  config.Validate();
  if (subcommand == "all") {
    for (const auto& name : Subcommands()) RunSubcommand(name, config);
    return;
  }
  const auto& table = StageTable();
  auto it = std::find_if(table.begin(), table.end(),
                         [&](const auto& e) { return e.first == subcommand; });
  if (it == table.end()) {
    throw Error("unknown_subcommand", "unknown subcommand '" + std::string(subcommand) + "'");
  }
  std::filesystem::create_directories(config.out);
  ArtifactStore store(config.out, config.Hash());
  Stage stage{config, store, Json::object(), {}};
  it->second(stage);

  Json run;
  run["subcommand"] = subcommand;
  run["version"] = kVersion;
  run["config_hash"] = config.Hash();
  run["seed"] = config.seed;
  Json artifacts = Json::object();
  for (const auto& name : stage.produced) artifacts[name] = store.ContentHash(name);
  run["artifacts"] = artifacts;
  run["stats"] = stage.stats;
  run["config"] = nlohmann::ordered_json::parse(config.ToJson().dump());
  run["config"].erase("jobs");
  run["config"]["paths"].erase("out");
  WriteFileBytes(config.out / ("run_" + std::string(subcommand) + ".json"), run.dump(2) + "\n");
}

}  // namespace recolab
