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
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "recolab/common.h"
#include "recolab/meta_predict.h"
#include "recolab/rng.h"
#include "test_util.h"

namespace recolab {
namespace {

Matrix RandomMatrix(Rng& rng, int n, int p) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.Normal();
  }
  return x;
}

Vector Centered(const Vector& y) { return (y.array() - y.mean()).matrix(); }

TEST(Poly2Test, TwoColumns) {
  Matrix x(1, 2);
  x << 2.0, 3.0;
  const Matrix f = Poly2Features(x);
  ASSERT_EQ(f.cols(), 5);
  EXPECT_EQ(f(0, 0), 2.0);
  EXPECT_EQ(f(0, 1), 3.0);
  EXPECT_EQ(f(0, 2), 4.0);
  EXPECT_EQ(f(0, 3), 6.0);
  EXPECT_EQ(f(0, 4), 9.0);
  const auto names = Poly2Names({"a", "b"});
  ASSERT_EQ(names.size(), 5u);
  EXPECT_EQ(names[0], "a");
  EXPECT_EQ(names[4].find('b') != std::string::npos, true);
}

TEST(Poly2Test, NineteenFeaturesGive209Columns) {
  Rng rng(1);
  EXPECT_EQ(Poly2Features(RandomMatrix(rng, 3, 19)).cols(), 209);
  EXPECT_EQ(Poly2Names(MetaFeatureNames()).size(), 209u);
}

TEST(StandardizerTest, ZeroMeanUnitVariance) {
  Rng rng(2);
  Matrix x = RandomMatrix(rng, 40, 3);
  x.col(2).setConstant(7.0);
  const auto s = Standardizer::Fit(x);
  const Matrix z = s.Apply(x);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(z.col(j).squaredNorm() / 40.0, 1.0, 1e-12);
  }
  EXPECT_EQ(z.col(2).norm(), 0.0);
}

TEST(LassoTest, SoftThreshold) {
  EXPECT_EQ(SoftThreshold(3.0, 1.0), 2.0);
  EXPECT_EQ(SoftThreshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(SoftThreshold(0.5, 1.0), 0.0);
}

TEST(LassoTest, SingleColumnClosedForm) {
  // Standardized column with x.y / n = 1, so beta = S(1, lambda).
  Matrix x(4, 1);
  x << 1, -1, 1, -1;
  Vector y(4);
  y << 1, -1, 1, -1;
  EXPECT_NEAR(FitLasso(x, y, 0.5).beta(0), 0.5, 1e-12);
  EXPECT_NEAR(FitLasso(x, y, 0.25).beta(0), 0.75, 1e-12);
  EXPECT_EQ(FitLasso(x, y, 1.0).beta(0), 0.0);
  EXPECT_NEAR(LassoLambdaMax(x, y), 1.0, 1e-15);

  Matrix x2(2, 1);
  x2 << -1, 1;
  Vector y2(2);
  y2 << -1, 1;
  EXPECT_NEAR(FitLasso(x2, y2, 0.5).beta(0), 0.5, 1e-8);
}

TEST(LassoTest, ZeroLambdaMatchesLeastSquares) {
  Rng rng(3);
  const Matrix x = Standardizer::Fit(RandomMatrix(rng, 50, 5)).Apply(RandomMatrix(rng, 50, 5));
  Vector y = Centered(RandomMatrix(rng, 50, 1).col(0));
  LassoOptions opt;
  opt.tol = 1e-13;
  const Vector lasso = FitLasso(x, y, 0.0, opt).beta;
  const Vector ols = x.colPivHouseholderQr().solve(y);
  EXPECT_LT((lasso - ols).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LassoTest, KktHoldsOnRandomProblems) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 10 + static_cast<int>(rng.Below(30));
    const int p = 2 + static_cast<int>(rng.Below(25));  // p > n sometimes
    const Matrix raw = RandomMatrix(rng, n, p);
    const Matrix x = Standardizer::Fit(raw).Apply(raw);
    Vector y = Centered(x.col(0) * 2.0 - x.col(1) + RandomMatrix(rng, n, 1).col(0));
    const double lambda = LassoLambdaMax(x, y) * (0.01 + 0.9 * rng.Uniform());
    const auto fit = FitLasso(x, y, lambda);
    EXPECT_LT(LassoKktViolation(x, y, fit.beta, lambda), 1e-6) << "trial " << trial;
  }
}

TEST(LassoTest, NullModelAtLambdaMax) {
  Rng rng(5);
  const Matrix raw = RandomMatrix(rng, 30, 6);
  const Matrix x = Standardizer::Fit(raw).Apply(raw);
  const Vector y = Centered(x.col(3) + 0.3 * RandomMatrix(rng, 30, 1).col(0));
  const double lmax = LassoLambdaMax(x, y);
  EXPECT_EQ(FitLasso(x, y, lmax).beta.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(FitLasso(x, y, 2 * lmax).beta.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(FitLasso(x, y, 0.9 * lmax).beta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LassoTest, ObjectiveNeverIncreases) {
  Rng rng(6);
  const Matrix raw = RandomMatrix(rng, 25, 12);
  const Matrix x = Standardizer::Fit(raw).Apply(raw);
  const Vector y = Centered(RandomMatrix(rng, 25, 1).col(0));
  LassoOptions opt;
  opt.trace = true;
  const auto fit = FitLasso(x, y, 0.05, opt);
  ASSERT_GE(fit.objective_trace.size(), 2u);
  for (size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-15);
  }
}

TEST(LassoTest, SparsityGrowsAsLambdaShrinks) {
  Rng rng(7);
  const Matrix raw = RandomMatrix(rng, 60, 10);
  const Matrix x = Standardizer::Fit(raw).Apply(raw);
  const Vector y = Centered(3 * x.col(0) + 2 * x.col(1) + x.col(2) +
                            0.5 * RandomMatrix(rng, 60, 1).col(0));
  const double lmax = LassoLambdaMax(x, y);
  int previous = 0;
  for (double frac : {0.9, 0.5, 0.1, 0.001}) {
    const auto beta = FitLasso(x, y, frac * lmax).beta;
    const int nonzero = static_cast<int>((beta.array() != 0.0).count());
    EXPECT_GE(nonzero, previous);
    previous = nonzero;
  }
  EXPECT_GE(previous, 3);
}

TEST(LassoTest, NonConvergenceIsReported) {
  Rng rng(8);
  const Matrix raw = RandomMatrix(rng, 20, 8);
  const Matrix x = Standardizer::Fit(raw).Apply(raw);
  const Vector y = Centered(RandomMatrix(rng, 20, 1).col(0));
  LassoOptions opt;
  opt.max_iter = 1;
  opt.tol = 1e-15;
  try {
    FitLasso(x, y, 0.0, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no_convergence");
  }
}

TEST(OlsTest, RecoversCoefficients) {
  Matrix x(4, 2);
  x << 1, 0, 0, 1, 1, 1, 2, 1;
  Vector y = x * Vector::Constant(2, 1.5);
  const Vector b = FitOls(x, y, 0.0);
  EXPECT_NEAR(b(0), 1.5, 1e-12);
  EXPECT_NEAR(b(1), 1.5, 1e-12);
}

TEST(OlsTest, RankDeficientWithoutJitter) {
  Matrix x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;
  const Vector y = Vector::LinSpaced(4, 0, 3);
  try {
    FitOls(x, y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "rank_deficient");
  }
  EXPECT_NO_THROW(FitOls(x, y));
}

TEST(TreeTest, DepthZeroIsTheMean) {
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  Vector y(4);
  y << 1, 2, 3, 6;
  const auto tree = FitTree(x, y, 0, 1);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(tree.Predict(x.row(0)), 3.0);
}

TEST(TreeTest, DepthOneFindsTheStep) {
  Matrix x(6, 2);
  x << 0, 5, 1, 4, 2, 3, 10, 2, 11, 1, 12, 0;
  Vector y(6);
  y << 1, 1, 1, 5, 5, 5;
  const auto tree = FitTree(x, y, 1, 1);
  ASSERT_EQ(tree.nodes.size(), 3u);
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(tree.Predict(x.row(i)), y(i));
  const auto& root = tree.nodes[0];
  EXPECT_GE(root.threshold, root.feature == 0 ? 2.0 : 2.0);
  EXPECT_LT(root.threshold, root.feature == 0 ? 10.0 : 3.0);
}

TEST(TreeTest, MinLeafRespected) {
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  Vector y(4);
  y << 0, 0, 0, 9;
  const auto tree = FitTree(x, y, 3, 2);
  for (const auto& node : tree.nodes) {
    if (node.feature >= 0) continue;
    EXPECT_NE(node.value, 9.0);  // a one-row leaf would predict 9 exactly
  }
}

// O(n^2) tau-b straight from pair counts.
double BruteTauB(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0, untied_x = 0, untied_y = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      const double dx = (x[i] > x[j]) - (x[i] < x[j]);
      const double dy = (y[i] > y[j]) - (y[i] < y[j]);
      s += dx * dy;
      untied_x += dx != 0;
      untied_y += dy != 0;
    }
  }
  return s / std::sqrt(untied_x * untied_y);
}

TEST(KendallTest, HandFixtureWithExactPValue) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {1, 3, 2, 5, 4};
  const auto k = KendallTauB(x, y);
  EXPECT_NEAR(k.tau_b, 0.6, 1e-15);
  // 28 of the 120 orderings have |S| >= 6.
  EXPECT_NEAR(k.p_value, 28.0 / 120.0, 1e-15);
}

TEST(KendallTest, Reversed) {
  std::vector<double> x(20), y(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = i;
    y[i] = -i * 0.5;
  }
  const auto k = KendallTauB(x, y);
  EXPECT_DOUBLE_EQ(k.tau_b, -1.0);
  // Normal approximation without ties: S = -190, var = n(n-1)(2n+5)/18.
  const double z = 190.0 / std::sqrt(20.0 * 19.0 * 45.0 / 18.0);
  EXPECT_NEAR(k.p_value, std::erfc(z / std::sqrt(2.0)), 1e-15);
}

TEST(KendallTest, MatchesBruteForceWithTies) {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.Below(49));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.Below(6));
      y[i] = static_cast<double>(rng.Below(trial % 2 ? 4 : 1000));
    }
    const auto k = KendallTauB(x, y);
    const double brute = BruteTauB(x, y);
    if (std::isnan(brute)) {
      EXPECT_TRUE(k.degenerate);
    } else {
      EXPECT_NEAR(k.tau_b, brute, 1e-12) << "trial " << trial;
      EXPECT_GE(k.p_value, 0.0);
      EXPECT_LE(k.p_value, 1.0);
    }
  }
}

TEST(KendallTest, ConstantInputIsDegenerate) {
  const std::vector<double> x = {1, 1, 1, 1};
  const std::vector<double> y = {1, 2, 3, 4};
  EXPECT_TRUE(KendallTauB(x, y).degenerate);
}

TEST(R2Test, Values) {
  const std::vector<double> y = {1, 2, 3, 4};
  const std::vector<double> perfect = y;
  const std::vector<double> mean = {2.5, 2.5, 2.5, 2.5};
  const std::vector<double> off = {2, 2, 3, 3};
  EXPECT_DOUBLE_EQ(ComputeR2(y, perfect).value, 1.0);
  EXPECT_TRUE(ComputeR2(y, mean).degenerate);
  EXPECT_EQ(ComputeR2(y, mean).value, 0.0);
  EXPECT_DOUBLE_EQ(ComputeR2(y, off).value, 1.0 - 2.0 / 5.0);
  const std::vector<double> flat = {3, 3, 3, 3};
  EXPECT_TRUE(ComputeR2(flat, y).degenerate);
}

MetaHyper Light(ModelFamily family, bool poly2) {
  MetaHyper h;
  h.family = family;
  h.poly2 = poly2;
  h.n_lambdas = 10;
  h.lasso.tol = 1e-8;
  return h;
}

std::vector<std::string> Names(int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

TEST(LoocvTest, LinearSignalIsRecovered) {
  Rng rng(10);
  const Matrix x = RandomMatrix(rng, 36, 3);
  const Vector y = 2 * x.col(0) - x.col(1) + 0.01 * RandomMatrix(rng, 36, 1).col(0);
  for (auto family : {ModelFamily::kOls, ModelFamily::kLasso}) {
    const Vector pred = Loocv(x, y, Names(3), Light(family, false));
    ASSERT_EQ(pred.size(), 36);
    const auto r2 = ComputeR2({y.data(), 36}, {pred.data(), 36});
    EXPECT_GT(r2.value, 0.99) << ModelFamilyName(family);
  }
}

TEST(LoocvTest, HeldOutRowDoesNotLeak) {
  // Prediction for row i must equal a fit on the other rows.
  Rng rng(11);
  const Matrix x = RandomMatrix(rng, 12, 2);
  const Vector y = RandomMatrix(rng, 12, 1).col(0);
  const auto hyper = Light(ModelFamily::kOls, true);
  const Vector pred = Loocv(x, y, Names(2), hyper);
  for (int i : {0, 5, 11}) {
    Matrix xr(11, 2);
    Vector yr(11);
    for (int r = 0, k = 0; r < 12; ++r) {
      if (r == i) continue;
      xr.row(k) = x.row(r);
      yr(k++) = y(r);
    }
    const auto model = FitMetaModel(xr, yr, Names(2), hyper);
    EXPECT_NEAR(model.Predict(x.row(i))(0), pred(i), 1e-12);
  }
}

TEST(LoocvTest, ConstantTargetScoresZero) {
  Rng rng(12);
  const Matrix x = RandomMatrix(rng, 10, 2);
  const Vector y = Vector::Constant(10, 0.1);
  const Vector pred = Loocv(x, y, Names(2), Light(ModelFamily::kLasso, true));
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(pred(i), 0.1, 1e-15);
  const auto r2 = ComputeR2({y.data(), 10}, {pred.data(), 10});
  EXPECT_TRUE(r2.degenerate);
  EXPECT_EQ(r2.value, 0.0);
}

TEST(LoocvTest, RowOrderDoesNotMatter) {
  Rng rng(13);
  const Matrix x = RandomMatrix(rng, 15, 3);
  const Vector y = x.col(0) + 0.5 * RandomMatrix(rng, 15, 1).col(0);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 14; i > 0; --i) std::swap(perm[i], perm[rng.Below(i + 1)]);
  Matrix xp(15, 3);
  Vector yp(15);
  for (int i = 0; i < 15; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp(i) = y(perm[i]);
  }
  auto hyper = Light(ModelFamily::kLasso, true);
  const Vector a = Loocv(x, y, Names(3), hyper);
  hyper.jobs = 3;
  const Vector b = Loocv(xp, yp, Names(3), hyper);
  for (int i = 0; i < 15; ++i) EXPECT_NEAR(b(i), a(perm[i]), 1e-9);
}

TEST(LoocvTest, TooFewRows) {
  Matrix x(2, 1);
  x << 1, 2;
  Vector y(2);
  y << 1, 2;
  try {
    Loocv(x, y, Names(1), Light(ModelFamily::kOls, false));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "too_few_rows");
  }
}

TEST(SelectLambdaTest, OnTheGrid) {
  Rng rng(14);
  const Matrix x = RandomMatrix(rng, 20, 3);
  const Vector y = x.col(1) + 0.2 * RandomMatrix(rng, 20, 1).col(0);
  const auto hyper = Light(ModelFamily::kLasso, false);
  const double lambda = SelectLambda(x, y, hyper);
  const auto model = FitMetaModel(x, y, Names(3), hyper);
  EXPECT_EQ(model.lambda, lambda);
  const Matrix z = model.expanded_stats.Apply(model.raw_stats.Apply(x));
  const double lmax = LassoLambdaMax(z, Centered(y));
  const double steps = std::log(lambda / lmax) / std::log(hyper.lambda_ratio) * (hyper.n_lambdas - 1);
  EXPECT_NEAR(steps, std::round(steps), 1e-9);
}

OfflineReport Offline(const std::string& id, double base) {
  OfflineReport r;
  r.variant_id = id;
  for (size_t m = 0; m < kNumMetrics; ++m) r.means[m] = base + 0.01 * m;
  return r;
}

OnlineReport Online(const std::string& id, Segment s, size_t impressions, double ctr) {
  OnlineReport r;
  r.variant_id = id;
  r.segment = s;
  r.impressions = impressions;
  r.ctr = ctr;
  r.vrr = 2 * ctr;
  return r;
}

TEST(MetaDatasetTest, BuildSkipsEmptyCells) {
  const std::vector<OfflineReport> offline = {Offline("b", 0.2), Offline("a", 0.1)};
  const std::vector<OnlineReport> online = {
      Online("a", Segment::kS1_2, 10, 0.1), Online("a", Segment::kS3_5, 0, 0.0),
      Online("a", Segment::kS6_15, 5, 0.2), Online("b", Segment::kS1_2, 8, 0.3),
      Online("b", Segment::kAll, 30, 0.3)};
  const auto data = BuildMetaDataset(offline, online);
  ASSERT_EQ(data.rows.size(), 3u);
  EXPECT_EQ(data.rows[0].variant_id, "a");
  EXPECT_EQ(data.rows[0].features.back(), 1.0);
  EXPECT_EQ(data.rows[1].features.back(), 3.0);
  EXPECT_EQ(data.rows[2].variant_id, "b");
  EXPECT_DOUBLE_EQ(data.rows[2].features[0], 0.2);
  EXPECT_EQ(data.Features().cols(), 19);
  EXPECT_DOUBLE_EQ(data.Target("vrr")(1), 0.4);
  EXPECT_THROW(data.Target("ctr_typo"), Error);

  testing::TempDir dir("meta");
  WriteMetaDataset(data, dir / "meta.csv");
  const auto back = LoadMetaDataset(dir / "meta.csv");
  ASSERT_EQ(back.rows.size(), 3u);
  EXPECT_EQ(back.feature_names, data.feature_names);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.rows[i].variant_id, data.rows[i].variant_id);
    EXPECT_EQ(back.rows[i].segment, data.rows[i].segment);
    EXPECT_EQ(back.rows[i].features, data.rows[i].features);
    EXPECT_EQ(back.rows[i].ctr, data.rows[i].ctr);
    EXPECT_EQ(back.rows[i].vrr, data.rows[i].vrr);
  }
}

TEST(RankAllTest, ClampedAndTiesById) {
  Rng rng(15);
  const Matrix x = RandomMatrix(rng, 8, 19);
  const auto hyper = Light(ModelFamily::kOls, false);
  const auto high = FitMetaModel(x, Vector::Constant(8, 2.0), MetaFeatureNames(), hyper);
  const std::vector<OfflineReport> grid = {Offline("c", 0.3), Offline("a", 0.1),
                                           Offline("b", 0.2)};
  const auto ranked = RankAllVariants(high, grid, Segment::kS3_5);
  ASSERT_EQ(ranked.size(), 3u);
  for (const auto& r : ranked) EXPECT_EQ(r.predicted, 1.0);
  EXPECT_EQ(ranked[0].variant_id, "a");
  EXPECT_EQ(ranked[2].variant_id, "c");

  const auto low = FitMetaModel(x, Vector::Constant(8, -1.0), MetaFeatureNames(), hyper);
  for (const auto& r : RankAllVariants(low, grid, Segment::kS1_2)) EXPECT_EQ(r.predicted, 0.0);

  const auto wrong = FitMetaModel(x.leftCols(2), Vector::Constant(8, 0.1), Names(2), hyper);
  EXPECT_THROW(RankAllVariants(wrong, grid, Segment::kS1_2), Error);
}

TEST(RankAllTest, DescendingByPrediction) {
  // Target follows the first metric, so a higher base ranks higher.
  Matrix x(12, 19);
  Vector y(12);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 19; ++j) x(i, j) = 0.01 * i + 0.001 * j * ((i * 7 + j) % 3);
    x(i, 18) = 1 + i % 3;
    y(i) = 0.02 * i;
  }
  const auto model = FitMetaModel(x, y, MetaFeatureNames(), Light(ModelFamily::kOls, false));
  const std::vector<OfflineReport> grid = {Offline("lo", 0.0), Offline("hi", 0.1),
                                           Offline("mid", 0.05)};
  const auto ranked = RankAllVariants(model, grid, Segment::kS1_2);
  EXPECT_EQ(ranked[0].variant_id, "hi");
  EXPECT_EQ(ranked[1].variant_id, "mid");
  EXPECT_EQ(ranked[2].variant_id, "lo");
}

}  // namespace
}  // namespace recolab
