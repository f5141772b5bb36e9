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

// Grid execution and analysis over the per-variant offline reports:
// correlation matrices, Pareto front, metric clusters, A/B candidate choice.

#ifndef RECOLAB_GRIDLAB_H_
#define RECOLAB_GRIDLAB_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "recolab/offline_metrics.h"
#include "recolab/recommender.h"

namespace recolab {

enum class Orientation { kHigherBetter, kLowerBetter };

// MAE is the only lower-is-better metric.
Orientation MetricOrientation(Metric m);

// MAE, AUC, MRR, nDCG100, novT10, novU10, ILD10.
std::vector<Metric> RepresentativeMetrics();
std::vector<Metric> AllMetrics();

struct GridOptions {
  int jobs = 1;
  // When set, each variant's report is cached as <resume_dir>/<id>.csv and
  // reused on the next run.
  std::filesystem::path resume_dir;
  RecommendOptions recommend;
};

// Variants sharing (base, history) reuse one aggregation pass per user.
std::vector<OfflineReport> RunGrid(const std::vector<VariantConfig>& variants,
                                   const EvaluationSet& eval,
                                   const ModelSet& models,
                                   const GridOptions& options = {});

// offline_report.csv: variant_id, the 18 metric means, n_users.
void WriteOfflineReports(const std::vector<OfflineReport>& reports,
                         const std::filesystem::path& path);
std::vector<OfflineReport> LoadOfflineReports(const std::filesystem::path& path);

enum class CorrelationMethod { kPearson, kSpearman };

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // zero variance on either side; value is 0
};

// 1-based ranks, ties receive the average rank.
std::vector<double> AverageRanks(std::span<const double> x);
Correlation Pearson(std::span<const double> x, std::span<const double> y);
Correlation Spearman(std::span<const double> x, std::span<const double> y);
Correlation Correlate(std::span<const double> x, std::span<const double> y,
                      CorrelationMethod method);

struct CorrelationMatrix {
  std::vector<Metric> metrics;
  std::vector<double> values;  // row-major, metrics.size()^2
  std::vector<bool> degenerate;  // per metric column

  double at(size_t i, size_t j) const { return values[i * metrics.size() + j]; }
};

// Requires at least three reports.
CorrelationMatrix ComputeCorrelationMatrix(const std::vector<OfflineReport>& reports,
                                           CorrelationMethod method,
                                           const std::vector<Metric>& metrics = AllMetrics());
void WriteCorrelationMatrix(const CorrelationMatrix& m,
                            const std::filesystem::path& path);

// Complete-linkage grouping in metric order: a metric joins the current
// cluster when |rho| >= threshold against every member. The first member
// represents its cluster.
std::vector<std::vector<Metric>> ClusterMetrics(const CorrelationMatrix& m,
                                                double threshold = 0.96);

// Indices of rows not dominated by any other row; every column is to be
// maximized. Output is in input order.
std::vector<size_t> NonDominated(const std::vector<std::vector<double>>& points);

// Variant ids on the front under `metrics` with their orientation.
std::vector<std::string> ParetoFront(const std::vector<OfflineReport>& reports,
                                     const std::vector<Metric>& metrics);

struct Candidate {
  std::string variant_id;
  std::vector<std::string> reasons;  // e.g. "best:AUC", "worst:MAE"
};

struct SelectOptions {
  std::vector<Metric> metrics = RepresentativeMetrics();
  int budget = 12;
  double closeness_tol = 0.02;  // relative to the extreme value
  bool strict = false;
};

// For every metric the best and worst variant are added unless an already
// chosen variant is within closeness_tol of that extreme. Leftover budget
// goes to close-to-best members of under-represented base families.
std::vector<Candidate> SelectCandidates(const std::vector<OfflineReport>& reports,
                                        const SelectOptions& options);
void WriteCandidates(const std::vector<Candidate>& candidates,
                     const std::filesystem::path& path);
std::vector<Candidate> LoadCandidates(const std::filesystem::path& path);

}  // namespace recolab

#endif  // RECOLAB_GRIDLAB_H_
