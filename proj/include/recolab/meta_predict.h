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

// Predicting online rates from offline metrics: degree-2 features, LASSO,
// least squares and regression-tree models, leave-one-out validation and
// rank agreement.

#ifndef RECOLAB_META_PREDICT_H_
#define RECOLAB_META_PREDICT_H_

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recolab/offline_metrics.h"
#include "recolab/online_eval.h"

namespace recolab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Originals followed by x_i * x_j for i <= j in row-major pair order.
Matrix Poly2Features(const Matrix& x);
std::vector<std::string> Poly2Names(const std::vector<std::string>& names);

// Column z-scoring with the population stddev. Zero-variance columns map
// to 0.
struct Standardizer {
  Vector mean;
  Vector stddev;
  static Standardizer Fit(const Matrix& x);
  Matrix Apply(const Matrix& x) const;
};

double SoftThreshold(double z, double gamma);

// Objective (1/2n)|y - X b|^2 + lambda |b|_1 on standardized X and centered y.
double LassoObjective(const Matrix& x, const Vector& y, const Vector& beta,
                      double lambda);
// Smallest lambda with an all-zero solution: max_j |x_j . y| / n.
double LassoLambdaMax(const Matrix& x, const Vector& y);
// Largest violation of the subgradient optimality conditions.
double LassoKktViolation(const Matrix& x, const Vector& y, const Vector& beta,
                         double lambda);

struct LassoOptions {
  double tol = 1e-9;       // max coordinate change per sweep
  int max_iter = 100000;   // sweeps
  bool trace = false;      // record the objective after every sweep
};

struct LassoFit {
  Vector beta;
  int sweeps = 0;
  double max_update = 0.0;
  std::vector<double> objective_trace;
};

// Cyclic coordinate descent. Throws Error("no_convergence").
LassoFit FitLasso(const Matrix& x, const Vector& y, double lambda,
                  const LassoOptions& options = {},
                  const Vector* warm_start = nullptr);

// Normal equations, (X'X + jitter I) b = X'y. With jitter == 0 a
// rank-deficient X throws Error("rank_deficient").
Vector FitOls(const Matrix& x, const Vector& y, double jitter = 1e-10);

struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;
  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

// Greedy variance-reduction splits; a split goes left when x <= threshold.
RegressionTree FitTree(const Matrix& x, const Vector& y, int max_depth,
                       int min_leaf);

enum class ModelFamily { kLasso, kOls, kTree };
std::string_view ModelFamilyName(ModelFamily f);
ModelFamily ParseModelFamily(std::string_view name);

struct MetaHyper {
  ModelFamily family = ModelFamily::kLasso;
  bool poly2 = true;
  std::optional<double> lambda;  // unset: chosen by inner leave-one-out
  int n_lambdas = 50;
  double lambda_ratio = 1e-3;
  LassoOptions lasso;
  int max_depth = 3;
  int min_leaf = 2;
  int jobs = 1;
};

// Raw features are standardized, expanded, standardized again; y is centered.
struct MetaModel {
  ModelFamily family = ModelFamily::kLasso;
  bool poly2 = true;
  std::vector<std::string> raw_names;
  Standardizer raw_stats;
  Standardizer expanded_stats;
  double intercept = 0.0;
  Vector beta;
  double lambda = 0.0;
  RegressionTree tree;

  Matrix Design(const Matrix& raw) const;
  Vector Predict(const Matrix& raw) const;
  std::vector<std::string> ExpandedNames() const;
};

MetaModel FitMetaModel(const Matrix& x, const Vector& y,
                       const std::vector<std::string>& names,
                       const MetaHyper& hyper);

// Lambda with the lowest leave-one-out squared error on the log-spaced grid
// from lambda_max down to lambda_max * lambda_ratio (ties: larger lambda).
double SelectLambda(const Matrix& x, const Vector& y, const MetaHyper& hyper);

// Prediction for every row from a model fitted on the other rows; all
// preprocessing is refitted per fold. Throws Error("too_few_rows") for n < 3.
Vector Loocv(const Matrix& x, const Vector& y,
             const std::vector<std::string>& names, const MetaHyper& hyper);

struct RSquared {
  double value = 0.0;
  bool degenerate = false;  // constant target or constant prediction
};
RSquared ComputeR2(std::span<const double> y, std::span<const double> yhat);

struct KendallResult {
  double tau_b = 0.0;
  double p_value = 1.0;  // two-sided
  bool degenerate = false;
};
// O(n log n) pair counting; exact permutation p-value for n <= 8, otherwise
// the tie-adjusted normal approximation.
KendallResult KendallTauB(std::span<const double> x, std::span<const double> y);

struct PredictionScore {
  RSquared r2;
  KendallResult kendall;
};
PredictionScore ScorePredictions(std::span<const double> y,
                                 std::span<const double> yhat);

// ---------------------------------------------------------------------------
// Meta dataset: one row per (arm, segment).

struct MetaRow {
  std::string variant_id;
  Segment segment = Segment::kS1_2;
  std::vector<double> features;  // 18 offline metrics + segment code
  double ctr = 0.0;
  double vrr = 0.0;
};

struct MetaDataset {
  std::vector<std::string> feature_names;
  std::vector<MetaRow> rows;
  Matrix Features() const;
  Vector Target(std::string_view target) const;  // "ctr" or "vrr"
};

// 1, 2, 3 for s1_2, s3_5, s6_15; nullopt otherwise.
std::optional<int> SegmentCode(Segment s);
std::vector<std::string> MetaFeatureNames();

MetaDataset BuildMetaDataset(const std::vector<OfflineReport>& offline,
                             const std::vector<OnlineReport>& online,
                             const std::vector<Segment>& segments = {
                                 Segment::kS1_2, Segment::kS3_5, Segment::kS6_15});
void WriteMetaDataset(const MetaDataset& data, const std::filesystem::path& path);
MetaDataset LoadMetaDataset(const std::filesystem::path& path);

struct RankedVariant {
  std::string variant_id;
  Segment segment = Segment::kS1_2;
  double predicted = 0.0;
};

// Predictions clamped to [0, 1], descending, ties by variant id.
std::vector<RankedVariant> RankAllVariants(const MetaModel& model,
                                           const std::vector<OfflineReport>& grid,
                                           Segment segment);

void WriteMetaModel(const MetaModel& model, const PredictionScore& score,
                    const std::filesystem::path& path);
void WriteRankedVariants(const std::vector<RankedVariant>& rows,
                         const std::filesystem::path& path);

}  // namespace recolab

#endif  // RECOLAB_META_PREDICT_H_
