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

// Item-to-item base models, history aggregation, novelty and diversity
// re-ranking, and the variant grid.

#ifndef RECOLAB_RECOMMENDER_H_
#define RECOLAB_RECOMMENDER_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recolab/corpus.h"
#include "recolab/timeutil.h"

namespace recolab {

// Dense n x n item similarity table.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(size_t n) : n_(n), values_(n * n, 0.0) {}

  size_t size() const { return n_; }
  double operator()(int a, int b) const { return values_[a * n_ + b]; }
  double& at(int a, int b) { return values_[a * n_ + b]; }
  std::span<const double> row(int a) const { return {values_.data() + a * n_, n_}; }

 private:
  size_t n_ = 0;
  std::vector<double> values_;
};

// Pairwise cosine of the rows of an n x dim matrix; zero rows give 0. The
// diagonal is 1 for non-zero rows unless `self_value` overrides it.
SimilarityMatrix CosineSimilarityMatrix(std::span<const double> rows, size_t n,
                                        size_t dim,
                                        std::optional<double> self_value = {});

enum class BaseKind { kWord2Vec, kDoc2Vec, kCosine };

struct BaseSpec {
  BaseKind kind = BaseKind::kCosine;
  int dim = 0;
  int window = 0;
  bool allow_self = false;

  // "w2v_e32_w5", "d2v_e128_w1", "cos_s1"
  std::string Id() const;
  std::string Family() const;  // "w2v", "d2v" or "cos"
  static BaseSpec Parse(std::string_view id);

  bool operator==(const BaseSpec&) const = default;
};

enum class HistoryKind { kMean, kMax, kLast, kLastK, kTemporalK, kTemporalFull };

struct HistoryStrategy {
  HistoryKind kind = HistoryKind::kMean;
  int k = 0;  // used by kLastK / kTemporalK

  // "mean", "max", "last", "last_5", "temporal_10", "temporal_full"
  std::string Id() const;
  static HistoryStrategy Parse(std::string_view id);

  bool operator==(const HistoryStrategy&) const = default;
};

struct VariantConfig {
  BaseSpec base;
  HistoryStrategy history;
  bool novelty = false;
  bool diversity = false;
  double lambda_novelty = 0.8;
  double lambda_diversity = 0.8;

  // e.g. "w2v_e32_w5.temporal_full.nov0.div1"
  std::string Id() const;
  static VariantConfig Parse(std::string_view id);
};

struct GridAxes {
  std::vector<int> dims = {32, 64, 128};
  std::vector<int> windows = {1, 3, 5};
  std::vector<bool> allow_self = {false, true};
  std::vector<std::string> families = {"w2v", "d2v", "cos"};
  std::vector<HistoryStrategy> histories = DefaultHistories();
  std::vector<bool> novelty = {false, true};
  std::vector<bool> diversity = {false, true};
  double lambda_novelty = 0.8;
  double lambda_diversity = 0.8;

  // mean, max, last, last_{3,5,10}, temporal_{3,5,10}, temporal_full
  static std::vector<HistoryStrategy> DefaultHistories();
};

std::vector<BaseSpec> EnumerateBases(const GridAxes& axes);
// Order: base, history, novelty flag, diversity flag.
std::vector<VariantConfig> EnumerateVariants(const GridAxes& axes);

struct BaseModel {
  BaseSpec spec;
  SimilarityMatrix sim;
  std::vector<bool> cold;
};

struct ModelSet {
  std::map<std::string, BaseModel> bases;  // keyed by BaseSpec::Id()
  SimilarityMatrix diversity_sim;          // CB cosine, self allowed

  // Throws Error("missing_artifact") if the base is absent.
  const BaseModel& Base(const BaseSpec& spec) const;
};

struct IndexedVisit {
  int item = 0;
  Instant timestamp;
};

using IndexedProfile = std::vector<IndexedVisit>;  // oldest first

// Maps a profile onto catalog indices; visits of unknown items are dropped.
IndexedProfile IndexProfile(const UserProfile& profile, const Catalog& catalog);

struct RecEntry {
  int item = 0;
  double score = 0.0;

  bool operator==(const RecEntry&) const = default;
};

struct RecList {
  std::vector<RecEntry> entries;
  std::string user_id;
  Instant as_of;
};

struct ScoreMap {
  std::vector<double> scores;
  bool cold_query = false;
};

// Similarity of every catalog item to `query`; unknown or cold queries give
// the all-zero map with cold_query set.
ScoreMap ScoreFromItem(const BaseModel& model, std::optional<int> query);

struct HistoryWeights {
  bool use_max = false;          // max strategy carries no weights
  std::vector<double> weights;   // aligned with the profile (oldest first)
};

// 1 / (ln(max(days, 1)) + 1) for a visit or update `days` whole days ago.
double RecencyWeight(int64_t days);
double TemporalNovelty(Date last_update, Instant as_of);
std::vector<double> ItemNovelty(const Catalog& catalog, Instant as_of);

// Throws Error("empty_profile").
HistoryWeights ComputeHistoryWeights(const HistoryStrategy& strategy,
                                     std::span<const IndexedVisit> profile,
                                     Instant as_of);

// Weighted average of per-visit score maps (weights renormalized over the
// non-zero ones), or the per-candidate maximum for the max strategy.
std::vector<double> AggregateHistory(const BaseModel& model,
                                     std::span<const IndexedVisit> profile,
                                     const HistoryStrategy& strategy,
                                     Instant as_of);

// Descending score, ties by ascending item index.
RecList RankScores(std::span<const double> scores);
void SortRecList(RecList& list);

// Rescales scores to [0, 1]; a constant list becomes all 0.5.
void MinMaxNormalize(RecList& list);

// score <- lambda * score + (1 - lambda) * novelty[item], then re-sorted.
RecList RerankTemporalNovelty(const RecList& list,
                              std::span<const double> item_novelty,
                              double lambda);

// Greedy maximal-marginal-relevance selection of min(k, n) entries by
// lambda * r - (1 - lambda) * max_{s selected} sim(o, s); the first pick is
// the most relevant entry and ties go to the smaller item index. Selected
// entries carry their margin as score; unselected entries follow in their
// original order with score lambda * r - (1 - lambda). Throws for k <= 0.
RecList RerankMmr(const RecList& list, const SimilarityMatrix& sim,
                  double lambda, int k);

struct RecommendOptions {
  int mmr_depth = 200;
  bool normalize = true;
};

struct RecContext {
  const ModelSet* models = nullptr;
  std::span<const double> item_novelty;
  RecommendOptions options;
};

// Rank, normalize, novelty re-rank, MMR over the head, truncate to k.
// k <= 0 keeps the full list.
RecList FinishRecommendation(std::span<const double> aggregated,
                             const VariantConfig& variant,
                             const RecContext& context, int k);

RecList Recommend(const VariantConfig& variant,
                  std::span<const IndexedVisit> profile, Instant as_of, int k,
                  const RecContext& context);

}  // namespace recolab

#endif  // RECOLAB_RECOMMENDER_H_
