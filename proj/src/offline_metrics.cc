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

#include "recolab/offline_metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "recolab/common.h"
#include "recolab/parallel.h"

namespace recolab {

std::string_view MetricName(Metric m) { return kMetricNames[static_cast<size_t>(m)]; }

std::optional<Metric> ParseMetric(std::string_view name) {
  for (size_t i = 0; i < kNumMetrics; ++i) {
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  }
  return std::nullopt;
}

Judgment Judgment::FromRecList(const RecList& list,
                               std::unordered_set<int> relevant,
                               std::unordered_set<int> known) {
  Judgment j;
  j.ranking.reserve(list.entries.size());
  j.scores.reserve(list.entries.size());
  for (const auto& e : list.entries) {
    j.ranking.push_back(e.item);
    j.scores.push_back(e.score);
  }
  j.relevant = std::move(relevant);
  j.known = std::move(known);
  return j;
}

RatingMetrics ComputeRatingMetrics(const Judgment& judgment) {
  const size_t n = judgment.ranking.size();
  if (n == 0) throw Error("empty_candidates", "empty candidate list");
  const auto [lo_it, hi_it] =
      std::minmax_element(judgment.scores.begin(), judgment.scores.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  double abs_err = 0.0, ss_res = 0.0, mean_r = 0.0;
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    r[i] = judgment.relevant.contains(judgment.ranking[i]) ? 1.0 : 0.0;
    mean_r += r[i];
  }
  mean_r /= n;
  double ss_tot = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double s = range > 0 ? (judgment.scores[i] - lo) / range : 0.5;
    abs_err += std::abs(s - r[i]);
    ss_res += (s - r[i]) * (s - r[i]);
    ss_tot += (r[i] - mean_r) * (r[i] - mean_r);
  }
  RatingMetrics m;
  m.mae = abs_err / n;
  if (ss_tot == 0.0) {
    m.degenerate_r2 = true;
    m.r2 = 0.0;
  } else {
    m.r2 = 1.0 - ss_res / ss_tot;
  }
  return m;
}

std::optional<double> Auc(std::span<const double> scores,
                          std::span<const char> is_relevant) {
  const size_t n = scores.size();
  size_t n_pos = 0;
  for (char r : is_relevant) n_pos += r ? 1 : 0;
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the relevant entries (ascending scores).
  double rank_sum = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t t = i; t < j; ++t) {
      if (is_relevant[order[t]]) rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

double PrecisionAt(std::span<const char> rel, int k) {
  const size_t lim = std::min<size_t>(k, rel.size());
  size_t hits = 0;
  for (size_t i = 0; i < lim; ++i) hits += rel[i] ? 1 : 0;
  return static_cast<double>(hits) / k;
}

double RecallAt(std::span<const char> rel, int k, size_t n_relevant) {
  if (n_relevant == 0) return 0.0;
  const size_t lim = std::min<size_t>(k, rel.size());
  size_t hits = 0;
  for (size_t i = 0; i < lim; ++i) hits += rel[i] ? 1 : 0;
  return static_cast<double>(hits) / n_relevant;
}

double NdcgAt(std::span<const char> rel, int k, size_t n_relevant) {
  const size_t lim = std::min<size_t>(k, rel.size());
  double dcg = 0.0, idcg = 0.0;
  for (size_t i = 0; i < lim; ++i) {
    if (rel[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const size_t ideal = std::min(lim, n_relevant);
  for (size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0 ? dcg / idcg : 0.0;
}

std::optional<RankingMetrics> ComputeRankingMetrics(const Judgment& judgment) {
  const size_t n = judgment.ranking.size();
  std::vector<char> rel(n);
  size_t n_rel = 0;
  for (size_t i = 0; i < n; ++i) {
    rel[i] = judgment.relevant.contains(judgment.ranking[i]) ? 1 : 0;
    n_rel += rel[i];
  }
  if (n_rel == 0) return std::nullopt;
  RankingMetrics m;
  m.auc = Auc(judgment.scores, rel);
  size_t hits = 0;
  double ap = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!rel[i]) continue;
    ++hits;
    if (hits == 1) m.mrr = 1.0 / static_cast<double>(i + 1);
    ap += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  m.map = ap / n_rel;
  m.p5 = PrecisionAt(rel, 5);
  m.p10 = PrecisionAt(rel, 10);
  m.r5 = RecallAt(rel, 5, n_rel);
  m.r10 = RecallAt(rel, 10, n_rel);
  m.ndcg10 = NdcgAt(rel, 10, n_rel);
  m.ndcg100 = NdcgAt(rel, 100, n_rel);
  m.ndcg = NdcgAt(rel, static_cast<int>(n), n_rel);
  return m;
}

ListMetric NoveltyTemporalAtK(std::span<const int> ranking,
                              std::span<const double> item_novelty, int k) {
  if (k < 1) throw Error("config", "k must be >= 1");
  ListMetric out;
  const size_t lim = std::min<size_t>(k, ranking.size());
  out.flagged = lim < static_cast<size_t>(k);
  if (lim == 0) return out;
  double s = 0.0;
  for (size_t i = 0; i < lim; ++i) s += item_novelty[ranking[i]];
  out.value = s / lim;
  return out;
}

ListMetric NoveltyUserAtK(std::span<const int> ranking,
                          const std::unordered_set<int>& known, int k) {
  if (k < 1) throw Error("config", "k must be >= 1");
  ListMetric out;
  const size_t lim = std::min<size_t>(k, ranking.size());
  out.flagged = lim < static_cast<size_t>(k);
  if (lim == 0) {
    out.value = 1.0;
    return out;
  }
  size_t seen = 0;
  for (size_t i = 0; i < lim; ++i) seen += known.contains(ranking[i]) ? 1 : 0;
  out.value = 1.0 - static_cast<double>(seen) / lim;
  return out;
}

ListMetric IldAtK(std::span<const int> ranking, const SimilarityMatrix& sim, int k) {
  ListMetric out;
  const size_t lim = std::min<size_t>(std::max(k, 0), ranking.size());
  if (lim < 2) {
    out.flagged = true;
    return out;
  }
  double total = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < lim; ++i) {
    for (size_t j = i + 1; j < lim; ++j) {
      total += std::clamp(1.0 - sim(ranking[i], ranking[j]), 0.0, 1.0);
      ++pairs;
    }
  }
  out.value = total / pairs;
  out.flagged = lim < static_cast<size_t>(k);
  return out;
}

UserMetrics EvaluateJudgment(const Judgment& judgment,
                             std::span<const double> item_novelty,
                             const SimilarityMatrix& attribute_sim) {
  UserMetrics u;
  auto& v = u.values;
  const RatingMetrics rating = ComputeRatingMetrics(judgment);
  v[static_cast<size_t>(Metric::kMae)] = rating.mae;
  v[static_cast<size_t>(Metric::kR2)] = rating.r2;
  if (auto ranking = ComputeRankingMetrics(judgment)) {
    u.has_auc = ranking->auc.has_value();
    v[static_cast<size_t>(Metric::kAuc)] = ranking->auc.value_or(0.0);
    v[static_cast<size_t>(Metric::kMap)] = ranking->map;
    v[static_cast<size_t>(Metric::kMrr)] = ranking->mrr;
    v[static_cast<size_t>(Metric::kP5)] = ranking->p5;
    v[static_cast<size_t>(Metric::kP10)] = ranking->p10;
    v[static_cast<size_t>(Metric::kR5)] = ranking->r5;
    v[static_cast<size_t>(Metric::kR10)] = ranking->r10;
    v[static_cast<size_t>(Metric::kNdcg10)] = ranking->ndcg10;
    v[static_cast<size_t>(Metric::kNdcg100)] = ranking->ndcg100;
    v[static_cast<size_t>(Metric::kNdcg)] = ranking->ndcg;
  }
  const std::span<const int> r = judgment.ranking;
  v[static_cast<size_t>(Metric::kNovT5)] = NoveltyTemporalAtK(r, item_novelty, 5).value;
  v[static_cast<size_t>(Metric::kNovT10)] = NoveltyTemporalAtK(r, item_novelty, 10).value;
  v[static_cast<size_t>(Metric::kNovU5)] = NoveltyUserAtK(r, judgment.known, 5).value;
  v[static_cast<size_t>(Metric::kNovU10)] = NoveltyUserAtK(r, judgment.known, 10).value;
  v[static_cast<size_t>(Metric::kIld5)] = IldAtK(r, attribute_sim, 5).value;
  v[static_cast<size_t>(Metric::kIld10)] = IldAtK(r, attribute_sim, 10).value;
  return u;
}

EvaluationSet BuildEvaluationSet(const SplitCorpus& split, const Catalog& catalog) {
  EvaluationSet eval;
  eval.as_of = split.split_point;
  eval.item_novelty = ItemNovelty(catalog, split.split_point);
  eval.popularity.assign(catalog.size(), 0.0);
  for (const auto& e : split.train.events) {
    if (e.kind != EventKind::kDetailView) continue;
    if (auto idx = catalog.IndexOf(e.item_id)) eval.popularity[*idx] += 1.0;
  }
  const auto profiles = BuildProfiles(split.train, split.split_point);
  std::map<std::string, std::unordered_set<int>> relevant;
  for (const auto& e : split.test.events) {
    if (e.kind != EventKind::kDetailView) continue;
    auto idx = catalog.IndexOf(e.item_id);
    auto& rel = relevant[e.user_id];
    if (idx) rel.insert(*idx);
  }
  std::set<std::string> test_users;
  for (const auto& e : split.test.events) test_users.insert(e.user_id);
  for (const auto& user : test_users) {
    auto it = relevant.find(user);
    if (it == relevant.end() || it->second.empty()) {
      ++eval.skipped_no_relevant;
      continue;
    }
    EvalUser u;
    u.user_id = user;
    u.relevant = it->second;
    if (auto p = profiles.find(user); p != profiles.end()) {
      u.profile = IndexProfile(p->second, catalog);
    }
    for (const auto& v : u.profile) u.known.insert(v.item);
    eval.users.push_back(std::move(u));
  }
  return eval;
}

OfflineReport AggregateUserMetrics(std::string variant_id,
                                   std::span<const UserMetrics> rows,
                                   size_t fallback_users) {
  OfflineReport report;
  report.variant_id = std::move(variant_id);
  report.n_users = rows.size();
  report.fallback_users = fallback_users;
  std::array<CompensatedSum, kNumMetrics> sums;
  for (const auto& row : rows) {
    for (size_t m = 0; m < kNumMetrics; ++m) {
      if (m == static_cast<size_t>(Metric::kAuc) && !row.has_auc) continue;
      sums[m].Add(row.values[m]);
    }
    if (row.has_auc) ++report.auc_users;
  }
  for (size_t m = 0; m < kNumMetrics; ++m) {
    const size_t denom =
        m == static_cast<size_t>(Metric::kAuc) ? report.auc_users : report.n_users;
    report.means[m] = denom ? sums[m].Total() / denom : 0.0;
  }
  return report;
}

OfflineReport EvaluateVariant(const VariantConfig& variant,
                              const EvaluationSet& eval, const ModelSet& models,
                              const RecommendOptions& options) {
  if (eval.users.empty()) throw Error("no_users", "no evaluable users");
  const BaseModel& base = models.Base(variant.base);
  const RecContext context{&models, eval.item_novelty, options};
  std::vector<UserMetrics> rows;
  rows.reserve(eval.users.size());
  size_t fallback = 0;
  for (const auto& user : eval.users) {
    std::vector<double> aggregated;
    if (user.profile.empty()) {
      aggregated = eval.popularity;
      ++fallback;
    } else {
      aggregated = AggregateHistory(base, user.profile, variant.history, eval.as_of);
    }
    const RecList list = FinishRecommendation(aggregated, variant, context, 0);
    const Judgment j = Judgment::FromRecList(list, user.relevant, user.known);
    rows.push_back(EvaluateJudgment(j, eval.item_novelty, models.diversity_sim));
  }
  return AggregateUserMetrics(variant.Id(), rows, fallback);
}

}  // namespace recolab
