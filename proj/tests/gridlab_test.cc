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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/gridlab.h"
#include "recolab/offline_metrics.h"
#include "recolab/rng.h"
#include "small_world.h"
#include "test_util.h"

namespace recolab {
namespace {

OfflineReport Report(std::string id, std::map<Metric, double> values) {
  OfflineReport r;
  r.variant_id = std::move(id);
  for (auto [m, v] : values) r.means[static_cast<size_t>(m)] = v;
  r.n_users = 10;
  return r;
}

TEST(OrientationTest, OnlyMaeIsLowerBetter) {
  for (Metric m : AllMetrics()) {
    EXPECT_EQ(MetricOrientation(m) == Orientation::kLowerBetter, m == Metric::kMae);
  }
  EXPECT_EQ(AllMetrics().size(), kNumMetrics);
}

TEST(NonDominatedTest, HandFixture) {
  const std::vector<std::vector<double>> pts = {{1, 1}, {2, 0.5}, {0.5, 2}, {1.5, 1.5}};
  EXPECT_EQ(NonDominated(pts), (std::vector<size_t>{1, 2, 3}));
}

TEST(NonDominatedTest, DuplicatesBothSurvive) {
  const std::vector<std::vector<double>> pts = {{1, 2}, {0, 0}, {1, 2}};
  EXPECT_EQ(NonDominated(pts), (std::vector<size_t>{0, 2}));
}

std::vector<size_t> QuadraticFront(const std::vector<std::vector<double>>& pts) {
  std::vector<size_t> front;
  for (size_t p = 0; p < pts.size(); ++p) {
    bool dominated = false;
    for (size_t q = 0; q < pts.size() && !dominated; ++q) {
      bool ge = true, gt = false;
      for (size_t d = 0; d < pts[p].size(); ++d) {
        ge = ge && pts[q][d] >= pts[p][d];
        gt = gt || pts[q][d] > pts[p][d];
      }
      dominated = ge && gt;
    }
    if (!dominated) front.push_back(p);
  }
  return front;
}

TEST(NonDominatedTest, MatchesQuadraticOracleAndIsFixpoint) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 1 + rng.Below(60);
    const size_t d = 1 + rng.Below(4);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (auto& p : pts) {
      for (auto& x : p) x = static_cast<double>(rng.Below(8));  // many ties
    }
    const auto front = NonDominated(pts);
    ASSERT_EQ(front, QuadraticFront(pts));
    std::vector<std::vector<double>> sub;
    for (size_t i : front) sub.push_back(pts[i]);
    std::vector<size_t> all(sub.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    EXPECT_EQ(NonDominated(sub), all);
  }
}

TEST(ParetoFrontTest, MaeIsMinimized) {
  const std::vector<OfflineReport> reports = {
      Report("a", {{Metric::kMae, 0.2}, {Metric::kAuc, 0.6}}),
      Report("b", {{Metric::kMae, 0.3}, {Metric::kAuc, 0.6}}),
      Report("c", {{Metric::kMae, 0.4}, {Metric::kAuc, 0.9}})};
  EXPECT_EQ(ParetoFront(reports, {Metric::kMae, Metric::kAuc}),
            (std::vector<std::string>{"a", "c"}));
}

TEST(CorrelationTest, PerfectCases) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> rev = {5, 4, 3, 2, 1};
  const std::vector<double> lin = {3, 5, 7, 9, 11};
  EXPECT_EQ(Spearman(x, rev).value, -1.0);
  EXPECT_EQ(Pearson(x, lin).value, 1.0);
  const std::vector<double> curved = {1, 8, 27, 64, 125};
  EXPECT_EQ(Spearman(x, curved).value, 1.0);
  EXPECT_LT(Pearson(x, curved).value, 1.0);
}

TEST(CorrelationTest, TiedRanks) {
  const std::vector<double> x = {1, 2, 2, 3, 4};
  const std::vector<double> y = {10, 30, 20, 50, 40};
  EXPECT_EQ(AverageRanks(x), (std::vector<double>{1, 2.5, 2.5, 4, 5}));
  EXPECT_NEAR(Spearman(x, y).value, 0.8720815992723809, 1e-12);
}

TEST(CorrelationTest, ZeroVarianceIsDegenerate) {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> c = {4, 4, 4};
  const auto r = Pearson(x, c);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(Spearman(c, x).degenerate);
}

TEST(CorrelationMatrixTest, SymmetricUnitDiagonalAndClusters) {
  Rng rng(6);
  std::vector<OfflineReport> reports;
  for (int i = 0; i < 40; ++i) {
    const double q = rng.Uniform();
    reports.push_back(Report("v" + std::to_string(i),
                             {{Metric::kAuc, q},
                              {Metric::kMap, q * 0.5 + 0.001 * rng.Uniform()},
                              {Metric::kMae, 1 - q},
                              {Metric::kNovU10, rng.Uniform()}}));
  }
  const std::vector<Metric> ms = {Metric::kAuc, Metric::kMap, Metric::kMae,
                                  Metric::kNovU10};
  const auto m = ComputeCorrelationMatrix(reports, CorrelationMethod::kSpearman, ms);
  for (size_t i = 0; i < ms.size(); ++i) {
    EXPECT_EQ(m.at(i, i), 1.0);
    for (size_t j = 0; j < ms.size(); ++j) EXPECT_EQ(m.at(i, j), m.at(j, i));
  }
  EXPECT_EQ(m.at(0, 2), -1.0);
  const auto clusters = ClusterMetrics(m);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0], (std::vector<Metric>{Metric::kAuc, Metric::kMap, Metric::kMae}));
  EXPECT_EQ(clusters[1], (std::vector<Metric>{Metric::kNovU10}));
  reports.resize(2);
  try {
    ComputeCorrelationMatrix(reports, CorrelationMethod::kPearson, ms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "too_few_reports");
  }
}

// Ten variants over three metrics; the expected picks are traced by hand.
std::vector<OfflineReport> SelectionFixture() {
  auto r = [](const char* id, double mae, double auc, double novu) {
    return Report(id, {{Metric::kMae, mae}, {Metric::kAuc, auc}, {Metric::kNovU10, novu}});
  };
  return {r("cos_s0.mean.nov0.div0", 0.30, 0.70, 0.50),
          r("cos_s1.mean.nov0.div0", 0.20, 0.80, 0.40),
          r("d2v_e32_w1.mean.nov0.div0", 0.25, 0.60, 0.90),
          r("d2v_e32_w1.max.nov0.div0", 0.40, 0.65, 0.20),
          r("d2v_e32_w3.mean.nov0.div0", 0.205, 0.79, 0.60),
          r("w2v_e32_w1.mean.nov0.div0", 0.35, 0.50, 0.70),
          r("w2v_e32_w1.max.nov0.div0", 0.33, 0.52, 0.88),
          r("w2v_e32_w3.mean.nov0.div0", 0.28, 0.77, 0.30),
          r("w2v_e32_w5.mean.nov0.div0", 0.38, 0.55, 0.85),
          r("w2v_e64_w1.mean.nov0.div0", 0.29, 0.78, 0.45)};
}

SelectOptions FixtureOptions(int budget) {
  SelectOptions o;
  o.metrics = {Metric::kMae, Metric::kAuc, Metric::kNovU10};
  o.budget = budget;
  o.closeness_tol = 0.05;
  return o;
}

TEST(SelectCandidatesTest, HandTrace) {
  const auto got = SelectCandidates(SelectionFixture(), FixtureOptions(6));
  const std::vector<Candidate> want = {
      {"cos_s1.mean.nov0.div0", {"best:MAE", "best:AUC"}},
      {"d2v_e32_w1.max.nov0.div0", {"worst:MAE", "worst:novU10"}},
      {"w2v_e32_w1.mean.nov0.div0", {"worst:AUC"}},
      {"d2v_e32_w1.mean.nov0.div0", {"best:novU10"}},
      {"d2v_e32_w3.mean.nov0.div0", {"diverse_best:MAE"}},
      {"w2v_e64_w1.mean.nov0.div0", {"diverse_best:AUC"}}};
  ASSERT_EQ(got.size(), want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(got[i].variant_id, want[i].variant_id) << i;
    EXPECT_EQ(got[i].reasons, want[i].reasons) << i;
  }
}

TEST(SelectCandidatesTest, BudgetStopsEarly) {
  const auto got = SelectCandidates(SelectionFixture(), FixtureOptions(3));
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[2].variant_id, "w2v_e32_w1.mean.nov0.div0");
}

TEST(SelectCandidatesTest, BudgetValidation) {
  EXPECT_THROW(SelectCandidates(SelectionFixture(), FixtureOptions(1)), Error);
  auto strict = FixtureOptions(2);
  strict.strict = true;
  EXPECT_THROW(SelectCandidates(SelectionFixture(), strict), Error);
  strict.strict = false;
  EXPECT_EQ(SelectCandidates(SelectionFixture(), strict).size(), 2u);
}

TEST(SelectCandidatesTest, InputOrderInvariant) {
  Rng rng(12);
  const auto base = SelectCandidates(SelectionFixture(), FixtureOptions(8));
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = SelectionFixture();
    for (size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.Below(i)]);
    const auto got = SelectCandidates(shuffled, FixtureOptions(8));
    ASSERT_EQ(got.size(), base.size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].variant_id, base[i].variant_id);
      EXPECT_EQ(got[i].reasons, base[i].reasons);
    }
  }
}

TEST(SelectCandidatesTest, NoDuplicatesWithinBudget) {
  Rng rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<OfflineReport> reports;
    for (int i = 0; i < 30; ++i) {
      std::map<Metric, double> v;
      for (Metric m : RepresentativeMetrics()) v[m] = rng.Uniform();
      reports.push_back(Report("cos_s0.last_" + std::to_string(i + 1) + ".nov0.div0", v));
    }
    SelectOptions o;
    o.budget = 2 + static_cast<int>(rng.Below(14));
    const auto got = SelectCandidates(reports, o);
    EXPECT_LE(got.size(), static_cast<size_t>(o.budget));
    std::set<std::string> ids;
    for (const auto& c : got) ids.insert(c.variant_id);
    EXPECT_EQ(ids.size(), got.size());
  }
}

TEST(CandidatesIoTest, RoundTrip) {
  testing::TempDir dir("cands");
  const auto c = SelectCandidates(SelectionFixture(), FixtureOptions(6));
  WriteCandidates(c, dir / "candidates.csv");
  const auto back = LoadCandidates(dir / "candidates.csv");
  ASSERT_EQ(back.size(), c.size());
  EXPECT_EQ(back[0].reasons, c[0].reasons);
}

TEST(RunGridTest, MatchesPerVariantEvaluation) {
  const auto w = testing::MakeSmallWorld(3);
  const auto eval = BuildEvaluationSet(w.split, w.catalog);
  GridAxes axes;
  axes.families = {"cos"};
  const auto variants = EnumerateVariants(axes);
  ASSERT_EQ(variants.size(), 80u);
  const auto reports = RunGrid(variants, eval, w.models);
  ASSERT_EQ(reports.size(), 80u);
  for (size_t i = 0; i < variants.size(); i += 7) {
    const auto single = EvaluateVariant(variants[i], eval, w.models);
    EXPECT_EQ(reports[i].variant_id, single.variant_id);
    for (size_t m = 0; m < kNumMetrics; ++m) {
      EXPECT_NEAR(reports[i].means[m], single.means[m], 1e-12);
    }
  }
}

TEST(RunGridTest, JobsAndResumeGiveIdenticalReports) {
  const auto w = testing::MakeSmallWorld(4);
  const auto eval = BuildEvaluationSet(w.split, w.catalog);
  GridAxes axes;
  axes.families = {"cos"};
  axes.histories = {HistoryStrategy::Parse("mean"), HistoryStrategy::Parse("temporal_3")};
  const auto variants = EnumerateVariants(axes);
  testing::TempDir dir("grid");
  GridOptions serial;
  const auto a = RunGrid(variants, eval, w.models, serial);
  GridOptions parallel;
  parallel.jobs = 4;
  parallel.resume_dir = dir.path();
  const auto b = RunGrid(variants, eval, w.models, parallel);
  WriteOfflineReports(a, dir / "a.csv");
  WriteOfflineReports(b, dir / "b.csv");
  EXPECT_EQ(ReadFileBytes(dir / "a.csv"), ReadFileBytes(dir / "b.csv"));

  // A cached report is reused as-is.
  const auto first = dir / (variants[0].Id() + ".csv");
  ASSERT_TRUE(std::filesystem::exists(first));
  OfflineReport doctored = b[0];
  doctored.means[static_cast<size_t>(Metric::kAuc)] = 0.123;
  WriteOfflineReports({doctored}, first);
  const auto c = RunGrid(variants, eval, w.models, parallel);
  EXPECT_EQ(c[0].Get(Metric::kAuc), 0.123);
  EXPECT_EQ(c[1].means, b[1].means);
}

TEST(OfflineReportIoTest, RoundTripBitExact) {
  testing::TempDir dir("reports");
  Rng rng(1);
  std::vector<OfflineReport> reports;
  for (int i = 0; i < 5; ++i) {
    OfflineReport r;
    r.variant_id = "cos_s0.last_" + std::to_string(i + 1) + ".nov0.div0";
    for (auto& v : r.means) v = rng.Uniform();
    r.n_users = 7 + i;
    reports.push_back(r);
  }
  WriteOfflineReports(reports, dir / "r.csv");
  const auto back = LoadOfflineReports(dir / "r.csv");
  ASSERT_EQ(back.size(), reports.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].variant_id, reports[i].variant_id);
    EXPECT_EQ(back[i].means, reports[i].means);
    EXPECT_EQ(back[i].n_users, reports[i].n_users);
  }
  auto in = OpenForRead(dir / "r.csv");
  CsvReader reader(in);
  std::vector<std::string> header;
  reader.Next(header);
  ASSERT_EQ(header.size(), kNumMetrics + 2);
  EXPECT_EQ(header.front(), "variant_id");
  EXPECT_EQ(header.back(), "n_users");
}

}  // namespace
}  // namespace recolab
