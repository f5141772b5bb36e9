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

#include "recolab/online_eval.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/parallel.h"

namespace recolab {
namespace {

const std::vector<std::string> kImpressionHeader = {"user_id", "variant_id",
                                                    "item_id", "timestamp"};
const std::vector<std::string> kReportHeader = {
    "variant_id", "segment", "impressions", "clicks", "visits", "ctr", "vrr"};

struct SegmentCounts {
  size_t impressions = 0;
  size_t clicks = 0;
  size_t visits = 0;
};

// Counts per (variant, segment index); kAll is folded in at the end.
using CountTable = std::map<std::string, std::array<SegmentCounts, 4>>;

struct UserResult {
  CountTable table;
  OnlineStats stats;
};

struct UserEvents {
  std::vector<const Impression*> impressions;
  std::vector<const Click*> clicks;
  std::vector<const Interaction*> visits;
};

// Events of one user in time order; equal timestamps keep input order.
template <typename T>
void SortByTime(std::vector<const T*>& v) {
  std::stable_sort(v.begin(), v.end(), [](const T* a, const T* b) {
    return a->timestamp < b->timestamp;
  });
}

UserResult ProcessUser(UserEvents& ev, const OnlineOptions& options,
                       Instant period_start) {
  SortByTime(ev.impressions);
  SortByTime(ev.clicks);
  SortByTime(ev.visits);
  const size_t n = ev.impressions.size();

  // Seniority: distinct items viewed strictly before the reference instant.
  std::vector<size_t> prior(n, 0);
  {
    std::set<std::string_view> seen;
    size_t v = 0;
    auto advance_to = [&](Instant t) {
      while (v < ev.visits.size() && ev.visits[v]->timestamp < t) {
        seen.insert(ev.visits[v]->item_id);
        ++v;
      }
    };
    if (options.mode == SeniorityMode::kPerUser) {
      advance_to(period_start);
      std::fill(prior.begin(), prior.end(), seen.size());
    } else {
      for (size_t i = 0; i < n; ++i) {
        advance_to(ev.impressions[i]->timestamp);
        prior[i] = seen.size();
      }
    }
  }

  std::vector<char> clicked(n, 0), visited(n, 0);
  UserResult out;
  out.stats.impressions = n;
  out.stats.clicks = ev.clicks.size();
  out.stats.visits = ev.visits.size();

  for (const Click* c : ev.clicks) {
    std::optional<size_t> match;
    for (size_t i = 0; i < n; ++i) {
      const Impression* imp = ev.impressions[i];
      if (imp->timestamp > c->timestamp) break;
      if (!clicked[i] && imp->item_id == c->item_id &&
          imp->variant_id == c->variant_id) {
        match = i;
      }
    }
    if (match) {
      clicked[*match] = 1;
    } else {
      ++out.stats.dropped_clicks;
    }
  }

  for (const Interaction* visit : ev.visits) {
    std::optional<size_t> last;
    for (size_t i = 0; i < n; ++i) {
      const Impression* imp = ev.impressions[i];
      if (imp->timestamp >= visit->timestamp) break;
      if (imp->item_id == visit->item_id) last = i;
    }
    if (!last || visited[*last]) continue;
    if (options.horizon_days) {
      const auto gap = visit->timestamp - ev.impressions[*last]->timestamp;
      if (gap > std::chrono::days(*options.horizon_days)) continue;
    }
    visited[*last] = 1;
    ++out.stats.credited_visits;
  }

  for (size_t i = 0; i < n; ++i) {
    const auto segment = SegmentOf(prior[i]);
    if (!segment) {
      ++out.stats.excluded_impressions;
      continue;
    }
    auto& counts = out.table[ev.impressions[i]->variant_id]
                            [static_cast<size_t>(*segment)];
    ++counts.impressions;
    counts.clicks += clicked[i];
    counts.visits += visited[i];
  }
  return out;
}

double Rate(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

size_t ParseCount(const std::string& s, const std::string& where) {
  size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("schema", where + ": bad count '" + s + "'");
  }
  return v;
}

}  // namespace

int AssignBucket(std::string_view user_id, int n_arms) {
  if (n_arms < 1) throw Error("config", "n_arms must be >= 1");
  uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(user_id.data(), user_id.data() + user_id.size(), value);
  if (user_id.empty() || ec != std::errc() ||
      ptr != user_id.data() + user_id.size()) {
    value = Fnv1a64(user_id);
  }
  return static_cast<int>(value % static_cast<uint64_t>(n_arms));
}

std::vector<Impression> LoadImpressions(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing " + path.string());
  }
  auto in = OpenForRead(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row != kImpressionHeader) {
    throw Error("header", path.string() +
                              ": expected user_id,variant_id,item_id,timestamp");
  }
  std::vector<Impression> out;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 4) {
      throw Error("malformed", path.string() + ": line " +
                                   std::to_string(reader.line()));
    }
    out.push_back({row[0], row[1], row[2], ParseInstant(row[3])});
  }
  return out;
}

void WriteImpressions(const std::vector<Impression>& rows,
                      const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row(kImpressionHeader);
  for (const auto& r : rows) {
    out.Row({r.user_id, r.variant_id, r.item_id, FormatInstant(r.timestamp)});
  }
}

std::string_view SegmentName(Segment s) {
  switch (s) {
    case Segment::kS1_2:
      return "s1_2";
    case Segment::kS3_5:
      return "s3_5";
    case Segment::kS6_15:
      return "s6_15";
    case Segment::kS16Plus:
      return "s16_plus";
    case Segment::kAll:
      return "all";
  }
  return "?";
}

std::optional<Segment> ParseSegment(std::string_view name) {
  for (Segment s : kSegments) {
    if (SegmentName(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Segment> SegmentOf(size_t prior_visits) {
  if (prior_visits == 0) return std::nullopt;
  if (prior_visits <= 2) return Segment::kS1_2;
  if (prior_visits <= 5) return Segment::kS3_5;
  if (prior_visits <= 15) return Segment::kS6_15;
  return Segment::kS16Plus;
}

OnlineResult EvaluateOnline(const std::vector<Impression>& impressions,
                            const std::vector<Click>& clicks,
                            const InteractionLog& log,
                            const OnlineOptions& options) {
  std::map<std::string, UserEvents> users;
  for (const auto& imp : impressions) users[imp.user_id].impressions.push_back(&imp);
  for (const auto& c : clicks) users[c.user_id].clicks.push_back(&c);
  for (const auto& e : log.events) {
    if (e.kind == EventKind::kDetailView) users[e.user_id].visits.push_back(&e);
  }

  Instant period_start{};
  if (options.period_start) {
    period_start = *options.period_start;
  } else if (!impressions.empty()) {
    period_start = std::min_element(impressions.begin(), impressions.end(),
                                    [](const auto& a, const auto& b) {
                                      return a.timestamp < b.timestamp;
                                    })->timestamp;
  }

  std::vector<UserEvents*> partitions;
  for (auto& [id, ev] : users) partitions.push_back(&ev);
  std::vector<UserResult> partial(partitions.size());
  ParallelFor(partitions.size(), options.jobs, [&](size_t i) {
    partial[i] = ProcessUser(*partitions[i], options, period_start);
  });

  OnlineResult result;
  CountTable table;
  std::set<std::string> variants;
  for (const auto& imp : impressions) variants.insert(imp.variant_id);
  for (const auto& v : variants) table[v];
  for (const auto& p : partial) {
    for (const auto& [variant, segs] : p.table) {
      for (size_t s = 0; s < 4; ++s) {
        table[variant][s].impressions += segs[s].impressions;
        table[variant][s].clicks += segs[s].clicks;
        table[variant][s].visits += segs[s].visits;
      }
    }
    result.stats.impressions += p.stats.impressions;
    result.stats.excluded_impressions += p.stats.excluded_impressions;
    result.stats.clicks += p.stats.clicks;
    result.stats.dropped_clicks += p.stats.dropped_clicks;
    result.stats.visits += p.stats.visits;
    result.stats.credited_visits += p.stats.credited_visits;
  }

  for (const auto& [variant, segs] : table) {
    SegmentCounts all;
    for (Segment s : kSegments) {
      SegmentCounts c;
      if (s == Segment::kAll) {
        c = all;
      } else {
        c = segs[static_cast<size_t>(s)];
        all.impressions += c.impressions;
        all.clicks += c.clicks;
        all.visits += c.visits;
      }
      result.rows.push_back({variant, s, c.impressions, c.clicks, c.visits,
                             Rate(c.clicks, c.impressions),
                             Rate(c.visits, c.impressions)});
    }
  }
  return result;
}

void WriteOnlineReports(const std::vector<OnlineReport>& rows,
                        const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row(kReportHeader);
  for (const auto& r : rows) {
    out.Row({r.variant_id, std::string(SegmentName(r.segment)),
             std::to_string(r.impressions), std::to_string(r.clicks),
             std::to_string(r.visits), FormatDouble(r.ctr), FormatDouble(r.vrr)});
  }
}

std::vector<OnlineReport> LoadOnlineReports(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing " + path.string());
  }
  auto in = OpenForRead(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row != kReportHeader) {
    throw Error("header", path.string() + ": unexpected online report header");
  }
  std::vector<OnlineReport> out;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != kReportHeader.size()) {
      throw Error("schema", path.string() + ": wrong field count");
    }
    const auto segment = ParseSegment(row[1]);
    if (!segment) throw Error("schema", "unknown segment '" + row[1] + "'");
    OnlineReport r;
    r.variant_id = row[0];
    r.segment = *segment;
    r.impressions = ParseCount(row[2], path.string());
    r.clicks = ParseCount(row[3], path.string());
    r.visits = ParseCount(row[4], path.string());
    r.ctr = std::strtod(row[5].c_str(), nullptr);
    r.vrr = std::strtod(row[6].c_str(), nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<OnlineCorrelation> OfflineOnlineCorrelation(
    const std::vector<OfflineReport>& offline,
    const std::vector<OnlineReport>& online, Segment segment,
    CorrelationMethod method) {
  std::map<std::string, const OfflineReport*> by_id;
  for (const auto& r : offline) by_id[r.variant_id] = &r;
  std::map<std::string, std::pair<const OfflineReport*, const OnlineReport*>> arms;
  for (const auto& r : online) {
    if (r.segment != segment) continue;
    auto it = by_id.find(r.variant_id);
    if (it != by_id.end()) arms[r.variant_id] = {it->second, &r};
  }
  if (arms.size() < 3) {
    throw Error("too_few_arms", "need at least 3 arms with offline and online "
                                "reports, got " + std::to_string(arms.size()));
  }
  std::vector<double> ctr, vrr;
  for (const auto& [id, pair] : arms) {
    ctr.push_back(pair.second->ctr);
    vrr.push_back(pair.second->vrr);
  }
  std::vector<OnlineCorrelation> out;
  for (const auto& [name, target] :
       {std::pair<std::string, const std::vector<double>*>{"CTR", &ctr},
        {"VRR", &vrr}}) {
    for (Metric m : AllMetrics()) {
      std::vector<double> x;
      for (const auto& [id, pair] : arms) x.push_back(pair.first->Get(m));
      out.push_back({segment, name, m, Correlate(x, *target, method)});
    }
  }
  return out;
}

void WriteOnlineCorrelations(const std::vector<OnlineCorrelation>& rows,
                             const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row({"segment", "online_metric", "offline_metric", "value", "degenerate"});
  for (const auto& r : rows) {
    out.Row({std::string(SegmentName(r.segment)), r.online_metric,
             std::string(MetricName(r.offline_metric)),
             FormatDouble(r.correlation.value, 12),
             r.correlation.degenerate ? "1" : "0"});
  }
}

}  // namespace recolab
