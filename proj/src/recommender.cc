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

#include "recolab/recommender.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "recolab/common.h"

namespace recolab {
namespace {

int ParseInt(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("variant", "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (;;) {
    const size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool RankedBefore(const RecEntry& a, const RecEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

}  // namespace

SimilarityMatrix CosineSimilarityMatrix(std::span<const double> rows, size_t n,
                                        size_t dim,
                                        std::optional<double> self_value) {
  if (rows.size() != n * dim) throw Error("dimension", "matrix shape mismatch");
  // Squared norms; sqrt(|a|^2 |b|^2) keeps identical rows at exactly 1.
  std::vector<double> norms(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t d = 0; d < dim; ++d) norms[i] += rows[i * dim + d] * rows[i * dim + d];
  }
  SimilarityMatrix sim(n);
  for (size_t i = 0; i < n; ++i) {
    const double* a = &rows[i * dim];
    sim.at(i, i) = self_value ? *self_value : (norms[i] > 0 ? 1.0 : 0.0);
    for (size_t j = i + 1; j < n; ++j) {
      double c = 0.0;
      if (norms[i] > 0 && norms[j] > 0) {
        const double* b = &rows[j * dim];
        double dot = 0.0;
        for (size_t d = 0; d < dim; ++d) dot += a[d] * b[d];
        c = std::clamp(dot / std::sqrt(norms[i] * norms[j]), -1.0, 1.0);
      }
      sim.at(i, j) = c;
      sim.at(j, i) = c;
    }
  }
  return sim;
}

// ---------------------------------------------------------------------------
// Identifiers

std::string BaseSpec::Id() const {
  switch (kind) {
    case BaseKind::kWord2Vec:
      return "w2v_e" + std::to_string(dim) + "_w" + std::to_string(window);
    case BaseKind::kDoc2Vec:
      return "d2v_e" + std::to_string(dim) + "_w" + std::to_string(window);
    case BaseKind::kCosine:
      return allow_self ? "cos_s1" : "cos_s0";
  }
  return "?";
}

std::string BaseSpec::Family() const {
  switch (kind) {
    case BaseKind::kWord2Vec:
      return "w2v";
    case BaseKind::kDoc2Vec:
      return "d2v";
    case BaseKind::kCosine:
      return "cos";
  }
  return "?";
}

BaseSpec BaseSpec::Parse(std::string_view id) {
  BaseSpec spec;
  if (id == "cos_s0" || id == "cos_s1") {
    spec.kind = BaseKind::kCosine;
    spec.allow_self = id == "cos_s1";
    return spec;
  }
  const auto parts = Split(id, '_');
  if (parts.size() != 3 || (parts[0] != "w2v" && parts[0] != "d2v") ||
      parts[1].size() < 2 || parts[1][0] != 'e' || parts[2].size() < 2 ||
      parts[2][0] != 'w') {
    throw Error("variant", "unknown base '" + std::string(id) + "'");
  }
  spec.kind = parts[0] == "w2v" ? BaseKind::kWord2Vec : BaseKind::kDoc2Vec;
  spec.dim = ParseInt(parts[1].substr(1), "embedding size");
  spec.window = ParseInt(parts[2].substr(1), "window");
  return spec;
}

std::string HistoryStrategy::Id() const {
  switch (kind) {
    case HistoryKind::kMean:
      return "mean";
    case HistoryKind::kMax:
      return "max";
    case HistoryKind::kLast:
      return "last";
    case HistoryKind::kLastK:
      return "last_" + std::to_string(k);
    case HistoryKind::kTemporalK:
      return "temporal_" + std::to_string(k);
    case HistoryKind::kTemporalFull:
      return "temporal_full";
  }
  return "?";
}

HistoryStrategy HistoryStrategy::Parse(std::string_view id) {
  if (id == "mean") return {HistoryKind::kMean, 0};
  if (id == "max") return {HistoryKind::kMax, 0};
  if (id == "last") return {HistoryKind::kLast, 0};
  if (id == "temporal_full") return {HistoryKind::kTemporalFull, 0};
  if (id.starts_with("last_")) {
    const int k = ParseInt(id.substr(5), "history k");
    if (k < 1) throw Error("variant", "history k must be >= 1");
    return {HistoryKind::kLastK, k};
  }
  if (id.starts_with("temporal_")) {
    const int k = ParseInt(id.substr(9), "history k");
    if (k < 1) throw Error("variant", "history k must be >= 1");
    return {HistoryKind::kTemporalK, k};
  }
  throw Error("variant", "unknown history strategy '" + std::string(id) + "'");
}

std::string VariantConfig::Id() const {
  return base.Id() + "." + history.Id() + ".nov" + (novelty ? "1" : "0") +
         ".div" + (diversity ? "1" : "0");
}

VariantConfig VariantConfig::Parse(std::string_view id) {
  const auto parts = Split(id, '.');
  if (parts.size() != 4 || (parts[2] != "nov0" && parts[2] != "nov1") ||
      (parts[3] != "div0" && parts[3] != "div1")) {
    throw Error("variant", "malformed variant id '" + std::string(id) + "'");
  }
  VariantConfig v;
  v.base = BaseSpec::Parse(parts[0]);
  v.history = HistoryStrategy::Parse(parts[1]);
  v.novelty = parts[2] == "nov1";
  v.diversity = parts[3] == "div1";
  return v;
}

std::vector<HistoryStrategy> GridAxes::DefaultHistories() {
  return {{HistoryKind::kMean, 0},      {HistoryKind::kMax, 0},
          {HistoryKind::kLast, 0},      {HistoryKind::kLastK, 3},
          {HistoryKind::kLastK, 5},     {HistoryKind::kLastK, 10},
          {HistoryKind::kTemporalK, 3}, {HistoryKind::kTemporalK, 5},
          {HistoryKind::kTemporalK, 10}, {HistoryKind::kTemporalFull, 0}};
}

std::vector<BaseSpec> EnumerateBases(const GridAxes& axes) {
  auto has = [&](std::string_view f) {
    return std::find(axes.families.begin(), axes.families.end(), f) !=
           axes.families.end();
  };
  std::vector<BaseSpec> bases;
  for (const auto& [family, kind] :
       {std::pair{"w2v", BaseKind::kWord2Vec}, std::pair{"d2v", BaseKind::kDoc2Vec}}) {
    if (!has(family)) continue;
    for (int e : axes.dims) {
      for (int w : axes.windows) bases.push_back({kind, e, w, false});
    }
  }
  if (has("cos")) {
    for (bool s : axes.allow_self) bases.push_back({BaseKind::kCosine, 0, 0, s});
  }
  return bases;
}

std::vector<VariantConfig> EnumerateVariants(const GridAxes& axes) {
  std::vector<VariantConfig> variants;
  for (const auto& base : EnumerateBases(axes)) {
    for (const auto& h : axes.histories) {
      for (bool nov : axes.novelty) {
        for (bool div : axes.diversity) {
          variants.push_back(
              {base, h, nov, div, axes.lambda_novelty, axes.lambda_diversity});
        }
      }
    }
  }
  return variants;
}

const BaseModel& ModelSet::Base(const BaseSpec& spec) const {
  auto it = bases.find(spec.Id());
  if (it == bases.end()) {
    throw Error("missing_artifact", "base model '" + spec.Id() + "' not trained");
  }
  return it->second;
}

IndexedProfile IndexProfile(const UserProfile& profile, const Catalog& catalog) {
  IndexedProfile out;
  out.reserve(profile.visits.size());
  for (const auto& v : profile.visits) {
    if (auto idx = catalog.IndexOf(v.item_id)) out.push_back({*idx, v.timestamp});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

ScoreMap ScoreFromItem(const BaseModel& model, std::optional<int> query) {
  ScoreMap out;
  const size_t n = model.sim.size();
  if (!query || *query < 0 || static_cast<size_t>(*query) >= n ||
      (!model.cold.empty() && model.cold[*query])) {
    out.scores.assign(n, 0.0);
    out.cold_query = true;
    return out;
  }
  const auto row = model.sim.row(*query);
  out.scores.assign(row.begin(), row.end());
  return out;
}

double RecencyWeight(int64_t days) {
  constexpr double kEpsilon = 1.0;
  return 1.0 / (std::log(static_cast<double>(std::max<int64_t>(days, 1))) + kEpsilon);
}

double TemporalNovelty(Date last_update, Instant as_of) {
  return RecencyWeight(WholeDaysBetween(ToInstant(last_update), as_of));
}

std::vector<double> ItemNovelty(const Catalog& catalog, Instant as_of) {
  std::vector<double> out(catalog.size());
  for (size_t i = 0; i < catalog.size(); ++i) {
    out[i] = TemporalNovelty(catalog.item(static_cast<int>(i)).last_update, as_of);
  }
  return out;
}

HistoryWeights ComputeHistoryWeights(const HistoryStrategy& strategy,
                                     std::span<const IndexedVisit> profile,
                                     Instant as_of) {
  if (profile.empty()) throw Error("empty_profile", "empty user profile");
  const size_t n = profile.size();
  HistoryWeights hw;
  hw.weights.assign(n, 0.0);
  switch (strategy.kind) {
    case HistoryKind::kMean:
      std::fill(hw.weights.begin(), hw.weights.end(), 1.0 / n);
      break;
    case HistoryKind::kMax:
      hw.use_max = true;
      hw.weights.clear();
      break;
    case HistoryKind::kLast:
      hw.weights[n - 1] = 1.0;
      break;
    case HistoryKind::kLastK:
      for (int rank = 0; rank < strategy.k && rank < static_cast<int>(n); ++rank) {
        hw.weights[n - 1 - rank] = 1.0 - static_cast<double>(rank) / strategy.k;
      }
      break;
    case HistoryKind::kTemporalK:
    case HistoryKind::kTemporalFull: {
      const size_t limit = strategy.kind == HistoryKind::kTemporalFull
                               ? n
                               : std::min<size_t>(n, strategy.k);
      for (size_t rank = 0; rank < limit; ++rank) {
        const auto& v = profile[n - 1 - rank];
        hw.weights[n - 1 - rank] = RecencyWeight(WholeDaysBetween(v.timestamp, as_of));
      }
      break;
    }
  }
  return hw;
}

std::vector<double> AggregateHistory(const BaseModel& model,
                                     std::span<const IndexedVisit> profile,
                                     const HistoryStrategy& strategy,
                                     Instant as_of) {
  const HistoryWeights hw = ComputeHistoryWeights(strategy, profile, as_of);
  const size_t n = model.sim.size();
  if (hw.use_max) {
    std::vector<double> out(n, -std::numeric_limits<double>::infinity());
    for (const auto& v : profile) {
      const ScoreMap s = ScoreFromItem(model, v.item);
      for (size_t c = 0; c < n; ++c) out[c] = std::max(out[c], s.scores[c]);
    }
    return out;
  }
  std::vector<double> out(n, 0.0);
  double total = 0.0;
  for (size_t i = 0; i < profile.size(); ++i) {
    const double w = hw.weights[i];
    if (w == 0.0) continue;
    total += w;
    const ScoreMap s = ScoreFromItem(model, profile[i].item);
    if (s.cold_query) continue;
    for (size_t c = 0; c < n; ++c) out[c] += w * s.scores[c];
  }
  for (double& x : out) x /= total;
  return out;
}

RecList RankScores(std::span<const double> scores) {
  RecList list;
  list.entries.reserve(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    list.entries.push_back({static_cast<int>(i), scores[i]});
  }
  SortRecList(list);
  return list;
}

void SortRecList(RecList& list) {
  std::sort(list.entries.begin(), list.entries.end(), RankedBefore);
}

void MinMaxNormalize(RecList& list) {
  if (list.entries.empty()) return;
  double lo = list.entries.front().score, hi = lo;
  for (const auto& e : list.entries) {
    lo = std::min(lo, e.score);
    hi = std::max(hi, e.score);
  }
  const double range = hi - lo;
  for (auto& e : list.entries) {
    e.score = range > 0 ? (e.score - lo) / range : 0.5;
  }
}

RecList RerankTemporalNovelty(const RecList& list,
                              std::span<const double> item_novelty,
                              double lambda) {
  RecList out = list;
  for (auto& e : out.entries) {
    e.score = lambda * e.score + (1.0 - lambda) * item_novelty[e.item];
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), RankedBefore);
  return out;
}

RecList RerankMmr(const RecList& list, const SimilarityMatrix& sim,
                  double lambda, int k) {
  if (k <= 0) throw Error("config", "MMR k must be positive");
  const size_t n = list.entries.size();
  const size_t picks = std::min<size_t>(k, n);
  RecList out;
  out.user_id = list.user_id;
  out.as_of = list.as_of;
  out.entries.reserve(n);
  std::vector<double> max_sim(n, 0.0);
  std::vector<char> taken(n, 0);
  for (size_t step = 0; step < picks; ++step) {
    size_t best = n;
    double best_margin = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double r = list.entries[i].score;
      const double margin =
          step == 0 ? lambda * r : lambda * r - (1.0 - lambda) * max_sim[i];
      if (best == n || margin > best_margin ||
          (margin == best_margin && list.entries[i].item < list.entries[best].item)) {
        best = i;
        best_margin = margin;
      }
    }
    taken[best] = 1;
    out.entries.push_back({list.entries[best].item, best_margin});
    const int picked = list.entries[best].item;
    for (size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double s = sim(list.entries[i].item, picked);
      max_sim[i] = step == 0 ? s : std::max(max_sim[i], s);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (!taken[i]) {
      out.entries.push_back(
          {list.entries[i].item, lambda * list.entries[i].score - (1.0 - lambda)});
    }
  }
  return out;
}

RecList FinishRecommendation(std::span<const double> aggregated,
                             const VariantConfig& variant,
                             const RecContext& context, int k) {
  RecList list = RankScores(aggregated);
  if (context.options.normalize) MinMaxNormalize(list);
  if (variant.novelty) {
    list = RerankTemporalNovelty(list, context.item_novelty, variant.lambda_novelty);
  }
  if (variant.diversity && !list.entries.empty()) {
    const size_t depth = std::min<size_t>(
        list.entries.size(), static_cast<size_t>(std::max(1, context.options.mmr_depth)));
    RecList head;
    head.entries.assign(list.entries.begin(), list.entries.begin() + depth);
    RecList reranked = RerankMmr(head, context.models->diversity_sim,
                                 variant.lambda_diversity, static_cast<int>(depth));
    const double lambda = variant.lambda_diversity;
    for (size_t i = depth; i < list.entries.size(); ++i) {
      reranked.entries.push_back(
          {list.entries[i].item, lambda * list.entries[i].score - (1.0 - lambda)});
    }
    list.entries = std::move(reranked.entries);
  }
  if (k > 0 && list.entries.size() > static_cast<size_t>(k)) {
    list.entries.resize(k);
  }
  return list;
}

RecList Recommend(const VariantConfig& variant,
                  std::span<const IndexedVisit> profile, Instant as_of, int k,
                  const RecContext& context) {
  const BaseModel& model = context.models->Base(variant.base);
  const auto aggregated = AggregateHistory(model, profile, variant.history, as_of);
  RecList list = FinishRecommendation(aggregated, variant, context, k);
  list.as_of = as_of;
  return list;
}

}  // namespace recolab
