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

#include "recolab/gridlab.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/parallel.h"

namespace recolab {
namespace {

std::vector<std::string> ReportHeader() {
  std::vector<std::string> h{"variant_id"};
  for (auto name : kMetricNames) h.emplace_back(name);
  h.emplace_back("n_users");
  return h;
}

std::vector<std::string> ReportRow(const OfflineReport& r) {
  std::vector<std::string> row{r.variant_id};
  for (double v : r.means) row.push_back(FormatDouble(v));
  row.push_back(std::to_string(r.n_users));
  return row;
}

OfflineReport ParseReportRow(const std::vector<std::string>& row,
                             const std::string& where) {
  if (row.size() != kNumMetrics + 2) {
    throw Error("schema", where + ": wrong field count in offline report");
  }
  OfflineReport r;
  r.variant_id = row[0];
  for (size_t m = 0; m < kNumMetrics; ++m) {
    r.means[m] = std::strtod(row[m + 1].c_str(), nullptr);
  }
  r.n_users = std::strtoull(row.back().c_str(), nullptr, 10);
  return r;
}

// Oriented value: larger is always better.
double Oriented(const OfflineReport& r, Metric m) {
  const double v = r.Get(m);
  return MetricOrientation(m) == Orientation::kLowerBetter ? -v : v;
}

std::string FamilyOf(const std::string& variant_id) {
  try {
    return VariantConfig::Parse(variant_id).base.Family();
  } catch (const Error&) {
    return "other";
  }
}

}  // namespace

Orientation MetricOrientation(Metric m) {
  return m == Metric::kMae ? Orientation::kLowerBetter : Orientation::kHigherBetter;
}

std::vector<Metric> RepresentativeMetrics() {
  return {Metric::kMae,   Metric::kAuc,   Metric::kMrr,  Metric::kNdcg100,
          Metric::kNovT10, Metric::kNovU10, Metric::kIld10};
}

std::vector<Metric> AllMetrics() {
  std::vector<Metric> all;
  for (size_t i = 0; i < kNumMetrics; ++i) all.push_back(static_cast<Metric>(i));
  return all;
}

// ---------------------------------------------------------------------------
// Grid

std::vector<OfflineReport> RunGrid(const std::vector<VariantConfig>& variants,
                                   const EvaluationSet& eval,
                                   const ModelSet& models,
                                   const GridOptions& options) {
  if (eval.users.empty()) throw Error("no_users", "no evaluable users");
  for (const auto& v : variants) models.Base(v.base);

  std::vector<std::vector<size_t>> groups;
  std::map<std::string, size_t> group_of;
  for (size_t i = 0; i < variants.size(); ++i) {
    const std::string key = variants[i].base.Id() + "." + variants[i].history.Id();
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  std::vector<OfflineReport> reports(variants.size());
  const RecContext context{&models, eval.item_novelty, options.recommend};
  auto cache_path = [&](const VariantConfig& v) {
    return options.resume_dir / (v.Id() + ".csv");
  };

  ParallelFor(groups.size(), options.jobs, [&](size_t g) {
    std::vector<size_t> pending;
    for (size_t idx : groups[g]) {
      if (!options.resume_dir.empty() &&
          std::filesystem::exists(cache_path(variants[idx]))) {
        const auto cached = LoadOfflineReports(cache_path(variants[idx]));
        if (cached.size() == 1 && cached[0].variant_id == variants[idx].Id()) {
          reports[idx] = cached[0];
          continue;
        }
      }
      pending.push_back(idx);
    }
    if (pending.empty()) return;

    const VariantConfig& first = variants[pending.front()];
    const BaseModel& base = models.Base(first.base);
    std::vector<std::vector<double>> aggregated(eval.users.size());
    size_t fallback = 0;
    for (size_t u = 0; u < eval.users.size(); ++u) {
      const auto& user = eval.users[u];
      if (user.profile.empty()) {
        aggregated[u] = eval.popularity;
        ++fallback;
      } else {
        aggregated[u] = AggregateHistory(base, user.profile, first.history, eval.as_of);
      }
    }
    std::vector<UserMetrics> rows(eval.users.size());
    for (size_t idx : pending) {
      const VariantConfig& v = variants[idx];
      for (size_t u = 0; u < eval.users.size(); ++u) {
        const RecList list = FinishRecommendation(aggregated[u], v, context, 0);
        const Judgment j = Judgment::FromRecList(list, eval.users[u].relevant,
                                                 eval.users[u].known);
        rows[u] = EvaluateJudgment(j, eval.item_novelty, models.diversity_sim);
      }
      reports[idx] = AggregateUserMetrics(v.Id(), rows, fallback);
      if (!options.resume_dir.empty()) {
        WriteOfflineReports({reports[idx]}, cache_path(v));
      }
    }
  });
  return reports;
}

void WriteOfflineReports(const std::vector<OfflineReport>& reports,
                         const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row(ReportHeader());
  for (const auto& r : reports) out.Row(ReportRow(r));
}

std::vector<OfflineReport> LoadOfflineReports(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing " + path.string());
  }
  auto in = OpenForRead(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row != ReportHeader()) {
    throw Error("header", path.string() + ": unexpected offline report header");
  }
  std::vector<OfflineReport> reports;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    reports.push_back(ParseReportRow(row, path.string()));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Correlation

std::vector<double> AverageRanks(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

Correlation Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("dimension", "length mismatch");
  const size_t n = x.size();
  Correlation c;
  if (n == 0) {
    c.degenerate = true;
    return c;
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    c.degenerate = true;
    return c;
  }
  c.value = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return c;
}

Correlation Spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  return Pearson(rx, ry);
}

Correlation Correlate(std::span<const double> x, std::span<const double> y,
                      CorrelationMethod method) {
  return method == CorrelationMethod::kPearson ? Pearson(x, y) : Spearman(x, y);
}

CorrelationMatrix ComputeCorrelationMatrix(const std::vector<OfflineReport>& reports,
                                           CorrelationMethod method,
                                           const std::vector<Metric>& metrics) {
  if (reports.size() < 3) {
    throw Error("too_few_reports", "correlation needs at least 3 reports");
  }
  const size_t k = metrics.size();
  std::vector<std::vector<double>> cols(k);
  for (size_t m = 0; m < k; ++m) {
    for (const auto& r : reports) cols[m].push_back(r.Get(metrics[m]));
  }
  CorrelationMatrix out;
  out.metrics = metrics;
  out.values.assign(k * k, 0.0);
  out.degenerate.assign(k, false);
  for (size_t i = 0; i < k; ++i) {
    out.degenerate[i] = Pearson(cols[i], cols[i]).degenerate;
    out.values[i * k + i] = 1.0;
    for (size_t j = i + 1; j < k; ++j) {
      const Correlation c = Correlate(cols[i], cols[j], method);
      out.values[i * k + j] = c.value;
      out.values[j * k + i] = c.value;
    }
  }
  return out;
}

void WriteCorrelationMatrix(const CorrelationMatrix& m,
                            const std::filesystem::path& path) {
  CsvWriter out(path);
  std::vector<std::string> row{"metric"};
  for (Metric metric : m.metrics) row.emplace_back(MetricName(metric));
  row.emplace_back("degenerate");
  out.Row(row);
  for (size_t i = 0; i < m.metrics.size(); ++i) {
    row.assign(1, std::string(MetricName(m.metrics[i])));
    for (size_t j = 0; j < m.metrics.size(); ++j) {
      row.push_back(FormatDouble(m.at(i, j), 12));
    }
    row.push_back(m.degenerate[i] ? "1" : "0");
    out.Row(row);
  }
}

std::vector<std::vector<Metric>> ClusterMetrics(const CorrelationMatrix& m,
                                                double threshold) {
  const size_t k = m.metrics.size();
  std::vector<char> assigned(k, 0);
  std::vector<std::vector<Metric>> clusters;
  for (size_t i = 0; i < k; ++i) {
    if (assigned[i]) continue;
    std::vector<size_t> members{i};
    assigned[i] = 1;
    for (size_t j = i + 1; j < k; ++j) {
      if (assigned[j]) continue;
      const bool close = std::all_of(members.begin(), members.end(), [&](size_t t) {
        return std::abs(m.at(t, j)) >= threshold;
      });
      if (close) {
        members.push_back(j);
        assigned[j] = 1;
      }
    }
    std::vector<Metric> cluster;
    for (size_t t : members) cluster.push_back(m.metrics[t]);
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// Pareto front

std::vector<size_t> NonDominated(const std::vector<std::vector<double>>& points) {
  // Any dominator of p precedes p in descending lexicographic order, and a
  // dominated point is always dominated by some front member, so one pass
  // against the front collected so far suffices.
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return points[a] > points[b]; });
  auto dominates = [&](size_t a, size_t b) {
    bool strict = false;
    for (size_t d = 0; d < points[a].size(); ++d) {
      if (points[a][d] < points[b][d]) return false;
      if (points[a][d] > points[b][d]) strict = true;
    }
    return strict;
  };
  std::vector<size_t> front;
  for (size_t p : order) {
    const bool dominated = std::any_of(front.begin(), front.end(),
                                       [&](size_t f) { return dominates(f, p); });
    if (!dominated) front.push_back(p);
  }
  std::sort(front.begin(), front.end());
  return front;
}

std::vector<std::string> ParetoFront(const std::vector<OfflineReport>& reports,
                                     const std::vector<Metric>& metrics) {
  std::vector<std::vector<double>> points;
  points.reserve(reports.size());
  for (const auto& r : reports) {
    std::vector<double> p;
    for (Metric m : metrics) p.push_back(Oriented(r, m));
    points.push_back(std::move(p));
  }
  std::vector<std::string> ids;
  for (size_t i : NonDominated(points)) ids.push_back(reports[i].variant_id);
  return ids;
}

// ---------------------------------------------------------------------------
// Candidate selection

std::vector<Candidate> SelectCandidates(const std::vector<OfflineReport>& reports,
                                        const SelectOptions& options) {
  if (options.budget < 2) throw Error("config", "budget must be >= 2");
  if (options.strict && options.budget < static_cast<int>(options.metrics.size())) {
    throw Error("config", "budget smaller than the number of metrics");
  }
  if (reports.empty()) return {};
  const size_t budget = static_cast<size_t>(options.budget);

  // Reports sorted by id make every tie-break independent of input order.
  std::vector<const OfflineReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return a->variant_id < b->variant_id;
  });

  std::vector<Candidate> chosen;
  std::map<std::string, const OfflineReport*> chosen_reports;
  auto close_to = [&](double value, double extreme) {
    return std::abs(value - extreme) <= options.closeness_tol * std::abs(extreme);
  };
  auto add = [&](const OfflineReport* r, const std::string& reason) {
    chosen.push_back({r->variant_id, {reason}});
    chosen_reports[r->variant_id] = r;
  };
  // Returns the chosen candidate close to `extreme` on `m`, if any.
  auto find_close = [&](Metric m, double extreme) -> Candidate* {
    for (auto& c : chosen) {
      if (close_to(chosen_reports[c.variant_id]->Get(m), extreme)) return &c;
    }
    return nullptr;
  };

  for (Metric m : options.metrics) {
    for (bool best : {true, false}) {
      const OfflineReport* extreme = nullptr;
      for (const auto* r : sorted) {
        const double v = Oriented(*r, m);
        if (!extreme || (best ? v > Oriented(*extreme, m) : v < Oriented(*extreme, m))) {
          extreme = r;
        }
      }
      const std::string reason =
          std::string(best ? "best:" : "worst:") + std::string(MetricName(m));
      if (Candidate* c = find_close(m, extreme->Get(m))) {
        c->reasons.push_back(reason);
        continue;
      }
      if (chosen.size() >= budget) return chosen;
      add(extreme, reason);
    }
  }

  // Close-to-best members of families with the fewest picks so far.
  std::set<std::string> families;
  for (const auto* r : sorted) families.insert(FamilyOf(r->variant_id));
  for (Metric m : options.metrics) {
    if (chosen.size() >= budget) break;
    const OfflineReport* overall = nullptr;
    for (const auto* r : sorted) {
      if (!overall || Oriented(*r, m) > Oriented(*overall, m)) overall = r;
    }
    std::map<std::string, size_t> counts;
    for (const auto& f : families) counts[f] = 0;
    for (const auto& c : chosen) ++counts[FamilyOf(c.variant_id)];
    std::vector<std::string> order(families.begin(), families.end());
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      return counts[a] < counts[b];
    });
    for (const auto& family : order) {
      if (chosen.size() >= budget) break;
      const OfflineReport* best = nullptr;
      for (const auto* r : sorted) {
        if (FamilyOf(r->variant_id) != family) continue;
        if (!best || Oriented(*r, m) > Oriented(*best, m)) best = r;
      }
      if (!best || chosen_reports.contains(best->variant_id)) continue;
      if (close_to(best->Get(m), overall->Get(m))) {
        add(best, "diverse_best:" + std::string(MetricName(m)));
      }
    }
  }
  return chosen;
}

void WriteCandidates(const std::vector<Candidate>& candidates,
                     const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row({"variant_id", "reason"});
  for (const auto& c : candidates) {
    std::string reasons;
    for (size_t i = 0; i < c.reasons.size(); ++i) {
      if (i) reasons += ";";
      reasons += c.reasons[i];
    }
    out.Row({c.variant_id, reasons});
  }
}

std::vector<Candidate> LoadCandidates(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing " + path.string());
  }
  auto in = OpenForRead(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row != std::vector<std::string>{"variant_id", "reason"}) {
    throw Error("header", path.string() + ": unexpected candidates header");
  }
  std::vector<Candidate> out;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2) throw Error("schema", path.string() + ": wrong field count");
    Candidate c{row[0], {}};
    size_t start = 0;
    while (start <= row[1].size()) {
      const size_t pos = row[1].find(';', start);
      c.reasons.push_back(row[1].substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace recolab
