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

// The eighteen offline metrics and per-variant evaluation.

#ifndef RECOLAB_OFFLINE_METRICS_H_
#define RECOLAB_OFFLINE_METRICS_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "recolab/corpus.h"
#include "recolab/recommender.h"

namespace recolab {

enum class Metric {
  kMae, kR2, kAuc, kMap, kMrr, kP5, kP10, kR5, kR10,
  kNdcg10, kNdcg100, kNdcg, kNovT5, kNovT10, kNovU5, kNovU10, kIld5, kIld10,
};

inline constexpr size_t kNumMetrics = 18;

inline constexpr std::array<std::string_view, kNumMetrics> kMetricNames = {
    "MAE",    "R2",      "AUC",  "MAP",   "MRR",    "P5",
    "P10",    "R5",      "R10",  "nDCG10", "nDCG100", "nDCG",
    "novT5",  "novT10",  "novU5", "novU10", "ILD5",  "ILD10"};

using MetricVector = std::array<double, kNumMetrics>;

std::string_view MetricName(Metric m);
std::optional<Metric> ParseMetric(std::string_view name);

// One user's ranking over the candidate set. `ranking` is ordered best first
// and `scores` is aligned with it.
struct Judgment {
  std::vector<int> ranking;
  std::vector<double> scores;
  std::unordered_set<int> relevant;
  std::unordered_set<int> known;

  static Judgment FromRecList(const RecList& list,
                              std::unordered_set<int> relevant,
                              std::unordered_set<int> known);
};

struct RatingMetrics {
  double mae = 0.0;
  double r2 = 0.0;
  bool degenerate_r2 = false;  // zero-variance relevance, R2 reported as 0
};

// Scores are min-max normalized over the candidates first (constant -> 0.5).
// Throws Error("empty_candidates").
RatingMetrics ComputeRatingMetrics(const Judgment& judgment);

struct RankingMetrics {
  std::optional<double> auc;  // undefined without both classes
  double map = 0.0;
  double mrr = 0.0;
  double p5 = 0.0, p10 = 0.0;
  double r5 = 0.0, r10 = 0.0;
  double ndcg10 = 0.0, ndcg100 = 0.0, ndcg = 0.0;
};

// nullopt when the judgment has no relevant candidate.
std::optional<RankingMetrics> ComputeRankingMetrics(const Judgment& judgment);

// Rank-sum AUC; tied scores earn half credit.
std::optional<double> Auc(std::span<const double> scores,
                          std::span<const char> is_relevant);
double PrecisionAt(std::span<const char> relevance_by_rank, int k);
double RecallAt(std::span<const char> relevance_by_rank, int k, size_t n_relevant);
double NdcgAt(std::span<const char> relevance_by_rank, int k, size_t n_relevant);

struct ListMetric {
  double value = 0.0;
  bool flagged = false;  // short list (or < 2 items for ILD)
};

ListMetric NoveltyTemporalAtK(std::span<const int> ranking,
                              std::span<const double> item_novelty, int k);
ListMetric NoveltyUserAtK(std::span<const int> ranking,
                          const std::unordered_set<int>& known, int k);
// Mean pairwise 1 - cos, clamped to [0, 1], over the top-k; `sim` holds the attribute
// cosines.
ListMetric IldAtK(std::span<const int> ranking, const SimilarityMatrix& sim, int k);

struct UserMetrics {
  MetricVector values{};
  bool has_auc = false;
};

UserMetrics EvaluateJudgment(const Judgment& judgment,
                             std::span<const double> item_novelty,
                             const SimilarityMatrix& attribute_sim);

struct OfflineReport {
  std::string variant_id;
  MetricVector means{};
  size_t n_users = 0;
  size_t auc_users = 0;       // users contributing to AUC
  size_t fallback_users = 0;  // served by the popularity fallback

  double Get(Metric m) const { return means[static_cast<size_t>(m)]; }
};

struct EvalUser {
  std::string user_id;
  IndexedProfile profile;
  std::unordered_set<int> relevant;
  std::unordered_set<int> known;
};

// Test users with train history, prepared once and shared by all variants.
struct EvaluationSet {
  std::vector<EvalUser> users;  // ascending user id
  Instant as_of;
  std::vector<double> item_novelty;
  std::vector<double> popularity;  // train detail-view counts, for fallback
  size_t skipped_no_relevant = 0;
};

EvaluationSet BuildEvaluationSet(const SplitCorpus& split, const Catalog& catalog);

// Aggregates per-user metric rows into a report (compensated means).
OfflineReport AggregateUserMetrics(std::string variant_id,
                                   std::span<const UserMetrics> rows,
                                   size_t fallback_users);

OfflineReport EvaluateVariant(const VariantConfig& variant,
                              const EvaluationSet& eval, const ModelSet& models,
                              const RecommendOptions& options = {});

}  // namespace recolab

#endif  // RECOLAB_OFFLINE_METRICS_H_
