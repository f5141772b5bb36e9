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

// Online accounting: arm bucketing, click and visit attribution, seniority
// segments and offline/online rank correlation.

#ifndef RECOLAB_ONLINE_EVAL_H_
#define RECOLAB_ONLINE_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recolab/corpus.h"
#include "recolab/gridlab.h"
#include "recolab/offline_metrics.h"
#include "recolab/timeutil.h"

namespace recolab {

// Numeric ids use value mod n, anything else its FNV-1a hash mod n.
int AssignBucket(std::string_view user_id, int n_arms);

// One item shown in one slot; clicks share the layout.
struct Impression {
  std::string user_id;
  std::string variant_id;
  std::string item_id;
  Instant timestamp;
  bool operator==(const Impression&) const = default;
};
using Click = Impression;

// `user_id,variant_id,item_id,timestamp`
std::vector<Impression> LoadImpressions(const std::filesystem::path& path);
void WriteImpressions(const std::vector<Impression>& rows,
                      const std::filesystem::path& path);

enum class Segment { kS1_2, kS3_5, kS6_15, kS16Plus, kAll };
inline constexpr Segment kSegments[] = {Segment::kS1_2, Segment::kS3_5,
                                        Segment::kS6_15, Segment::kS16Plus,
                                        Segment::kAll};

std::string_view SegmentName(Segment s);
std::optional<Segment> ParseSegment(std::string_view name);
// nullopt for an empty profile.
std::optional<Segment> SegmentOf(size_t prior_visits);

enum class SeniorityMode {
  kPerImpression,  // distinct items visited before each impression
  kPerUser,        // distinct items visited before the period start
};

struct OnlineOptions {
  SeniorityMode mode = SeniorityMode::kPerImpression;
  std::optional<int64_t> horizon_days;  // unbounded when unset
  // Start of the evaluation period for kPerUser; defaults to the first
  // impression.
  std::optional<Instant> period_start;
  int jobs = 1;
};

struct OnlineReport {
  std::string variant_id;
  Segment segment = Segment::kAll;
  size_t impressions = 0;
  size_t clicks = 0;
  size_t visits = 0;
  double ctr = 0.0;
  double vrr = 0.0;
};

struct OnlineStats {
  size_t impressions = 0;
  size_t excluded_impressions = 0;  // no prior visit
  size_t clicks = 0;
  size_t dropped_clicks = 0;        // no matching impression
  size_t visits = 0;                // detail views in the log
  size_t credited_visits = 0;
};

struct OnlineResult {
  // Variants ascending; each with the five segments in kSegments order.
  std::vector<OnlineReport> rows;
  OnlineStats stats;
};

// Clicks credit the latest uncredited impression with the same user, item
// and variant at or before the click. A detail view credits the latest
// impression of the same user and item strictly before it (within the
// horizon) unless that impression was already credited.
OnlineResult EvaluateOnline(const std::vector<Impression>& impressions,
                            const std::vector<Click>& clicks,
                            const InteractionLog& log,
                            const OnlineOptions& options = {});

void WriteOnlineReports(const std::vector<OnlineReport>& rows,
                        const std::filesystem::path& path);
std::vector<OnlineReport> LoadOnlineReports(const std::filesystem::path& path);

struct OnlineCorrelation {
  Segment segment = Segment::kAll;
  std::string online_metric;  // "CTR" or "VRR"
  Metric offline_metric = Metric::kMae;
  Correlation correlation;
};

// Correlates each offline metric with CTR and VRR across the arms present in
// both tables. Throws Error("too_few_arms") below three arms.
std::vector<OnlineCorrelation> OfflineOnlineCorrelation(
    const std::vector<OfflineReport>& offline,
    const std::vector<OnlineReport>& online, Segment segment,
    CorrelationMethod method = CorrelationMethod::kSpearman);

void WriteOnlineCorrelations(const std::vector<OnlineCorrelation>& rows,
                             const std::filesystem::path& path);

}  // namespace recolab

#endif  // RECOLAB_ONLINE_EVAL_H_
