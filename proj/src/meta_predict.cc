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

#include "recolab/meta_predict.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "json.hpp"
#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/gridlab.h"
#include "recolab/parallel.h"

namespace recolab {
namespace {

constexpr double kZeroScale = 1e-12;

Matrix DropRow(const Matrix& x, Eigen::Index skip) {
  Matrix out(x.rows() - 1, x.cols());
  for (Eigen::Index i = 0, r = 0; i < x.rows(); ++i) {
    if (i != skip) out.row(r++) = x.row(i);
  }
  return out;
}

Vector DropRow(const Vector& y, Eigen::Index skip) {
  Vector out(y.size() - 1);
  for (Eigen::Index i = 0, r = 0; i < y.size(); ++i) {
    if (i != skip) out(r++) = y(i);
  }
  return out;
}

std::vector<double> LambdaGrid(double lambda_max, int n, double ratio) {
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[i] = lambda_max * std::pow(ratio, frac);
  }
  return grid;
}

// Preprocessing shared by every family: returns the design matrix and fills
// the model's statistics.
Matrix Prepare(MetaModel& model, const Matrix& raw) {
  model.raw_stats = Standardizer::Fit(raw);
  Matrix z = model.raw_stats.Apply(raw);
  if (model.poly2) z = Poly2Features(z);
  model.expanded_stats = Standardizer::Fit(z);
  return model.expanded_stats.Apply(z);
}

int64_t PairsIn(int64_t t) { return t * (t - 1) / 2; }

// Sorts v while counting pairs i < j with v[i] > v[j].
int64_t CountInversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  int64_t swaps = 0;
  for (size_t width = 1; width < v.size(); width *= 2) {
    for (size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const size_t mid = std::min(lo + width, v.size());
      const size_t hi = std::min(lo + 2 * width, v.size());
      size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    v.swap(buf);
  }
  return swaps;
}

// Tie group sizes of a sorted sequence.
std::vector<int64_t> TieGroups(const std::vector<double>& sorted) {
  std::vector<int64_t> groups;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    groups.push_back(static_cast<int64_t>(j - i));
    i = j;
  }
  return groups;
}

int64_t BruteS(std::span<const double> x, std::span<const double> y,
               std::span<const size_t> perm) {
  int64_t s = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[perm[i]] - y[perm[j]];
      s += (dx * dy > 0) - (dx * dy < 0);
    }
  }
  return s;
}

}  // namespace

Matrix Poly2Features(const Matrix& x) {
  const Eigen::Index d = x.cols();
  Matrix out(x.rows(), d + d * (d + 1) / 2);
  out.leftCols(d) = x;
  Eigen::Index c = d;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      out.col(c++) = x.col(i).cwiseProduct(x.col(j));
    }
  }
  return out;
}

std::vector<std::string> Poly2Names(const std::vector<std::string>& names) {
  std::vector<std::string> out = names;
  for (size_t i = 0; i < names.size(); ++i) {
    for (size_t j = i; j < names.size(); ++j) {
      out.push_back(names[i] + "*" + names[j]);
    }
  }
  return out;
}

Standardizer Standardizer::Fit(const Matrix& x) {
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.stddev.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    s.stddev(j) = std::sqrt(var);
  }
  return s;
}

Matrix Standardizer::Apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error("dimension", "column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (stddev(j) <= kZeroScale) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - mean(j)) / stddev(j);
    }
  }
  return out;
}

double SoftThreshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double LassoObjective(const Matrix& x, const Vector& y, const Vector& beta,
                      double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

double LassoLambdaMax(const Matrix& x, const Vector& y) {
  if (x.cols() == 0) return 0.0;
  return (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

double LassoKktViolation(const Matrix& x, const Vector& y, const Vector& beta,
                         double lambda) {
  const double n = static_cast<double>(x.rows());
  const Vector g = x.transpose() * (y - x * beta) / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) == 0.0
                         ? std::max(0.0, std::abs(g(j)) - lambda)
                         : std::abs(g(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

LassoFit FitLasso(const Matrix& x, const Vector& y, double lambda,
                  const LassoOptions& options, const Vector* warm_start) {
  if (lambda < 0.0) throw Error("config", "lambda must be >= 0");
  if (x.rows() != y.size()) throw Error("dimension", "rows of X and y differ");
  const Eigen::Index p = x.cols();
  const double n = static_cast<double>(x.rows());
  LassoFit fit;
  fit.beta = warm_start ? *warm_start : Vector::Zero(p);
  if (fit.beta.size() != p) throw Error("dimension", "warm start size");
  Vector col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = x.col(j).squaredNorm() / n;
  Vector r = y - x * fit.beta;

  auto update = [&](Eigen::Index j) {
    if (col_sq(j) <= 0.0) return 0.0;
    const double old = fit.beta(j);
    const double z = x.col(j).dot(r) / n + col_sq(j) * old;
    const double fresh = SoftThreshold(z, lambda) / col_sq(j);
    const double delta = fresh - old;
    if (delta != 0.0) {
      r -= delta * x.col(j);
      fit.beta(j) = fresh;
    }
    return std::abs(delta);
  };
  auto sweep = [&](bool active_only) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (active_only && fit.beta(j) == 0.0) continue;
      worst = std::max(worst, update(j));
    }
    ++fit.sweeps;
    if (options.trace) fit.objective_trace.push_back(LassoObjective(x, y, fit.beta, lambda));
    return worst;
  };

  // Full sweeps decide convergence; in between, the active set is iterated
  // to convergence on its own.
  while (fit.sweeps < options.max_iter) {
    fit.max_update = sweep(false);
    if (fit.max_update < options.tol) return fit;
    while (fit.sweeps < options.max_iter) {
      if (sweep(true) < options.tol) break;
    }
  }
  throw Error("no_convergence",
              "coordinate descent did not converge in " +
                  std::to_string(options.max_iter) + " sweeps (lambda " +
                  FormatDouble(lambda, 6) + ", last max update " +
                  FormatDouble(fit.max_update, 6) + ")");
}

Vector FitOls(const Matrix& x, const Vector& y, double jitter) {
  if (x.rows() != y.size()) throw Error("dimension", "rows of X and y differ");
  Matrix gram = x.transpose() * x;
  const Vector rhs = x.transpose() * y;
  if (jitter == 0.0) {
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() < gram.rows()) {
      throw Error("rank_deficient", "X'X has rank " + std::to_string(lu.rank()) +
                                        " < " + std::to_string(gram.rows()));
    }
    return lu.solve(rhs);
  }
  gram.diagonal().array() += jitter;
  return gram.ldlt().solve(rhs);
}

double RegressionTree::Predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (nodes.empty()) return 0.0;
  int at = 0;
  while (nodes[at].feature >= 0) {
    at = row(nodes[at].feature) <= nodes[at].threshold ? nodes[at].left
                                                       : nodes[at].right;
  }
  return nodes[at].value;
}

RegressionTree FitTree(const Matrix& x, const Vector& y, int max_depth,
                       int min_leaf) {
  if (max_depth < 0 || min_leaf < 1) throw Error("config", "bad tree parameters");
  if (x.rows() != y.size() || y.size() == 0) throw Error("dimension", "bad tree data");
  RegressionTree tree;
  std::function<int(std::vector<Eigen::Index>, int)> grow =
      [&](std::vector<Eigen::Index> rows, int depth) -> int {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    for (auto r : rows) sum += y(r);
    const double m = static_cast<double>(rows.size());
    tree.nodes[id].value = sum / m;
    if (depth >= max_depth || rows.size() < 2 * static_cast<size_t>(min_leaf)) return id;

    double parent_sse = 0.0;
    for (auto r : rows) parent_sse += (y(r) - sum / m) * (y(r) - sum / m);
    double best_gain = 1e-12 * std::max(1.0, parent_sse);
    int best_feature = -1;
    double best_threshold = 0.0;
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      auto order = rows;
      std::stable_sort(order.begin(), order.end(),
                       [&](auto a, auto b) { return x(a, f) < x(b, f); });
      double left_sum = 0.0, left_sq = 0.0, total_sq = 0.0;
      for (auto r : order) total_sq += y(r) * y(r);
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        left_sum += y(order[i]);
        left_sq += y(order[i]) * y(order[i]);
        const size_t nl = i + 1, nr = order.size() - nl;
        if (nl < static_cast<size_t>(min_leaf) || nr < static_cast<size_t>(min_leaf)) continue;
        if (x(order[i], f) == x(order[i + 1], f)) continue;
        const double right_sum = sum - left_sum;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (total_sq - left_sq - right_sum * right_sum / nr);
        const double gain = parent_sse - sse;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (x(order[i], f) + x(order[i + 1], f));
        }
      }
    }
    if (best_feature < 0) return id;
    std::vector<Eigen::Index> left, right;
    for (auto r : rows) {
      (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    }
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    tree.nodes[id].left = l;
    tree.nodes[id].right = rr;
    return id;
  };
  std::vector<Eigen::Index> all(y.size());
  std::iota(all.begin(), all.end(), 0);
  grow(std::move(all), 0);
  return tree;
}

std::string_view ModelFamilyName(ModelFamily f) {
  switch (f) {
    case ModelFamily::kLasso:
      return "lasso";
    case ModelFamily::kOls:
      return "ols";
    case ModelFamily::kTree:
      return "tree";
  }
  return "?";
}

ModelFamily ParseModelFamily(std::string_view name) {
  for (auto f : {ModelFamily::kLasso, ModelFamily::kOls, ModelFamily::kTree}) {
    if (ModelFamilyName(f) == name) return f;
  }
  throw Error("config", "unknown model family '" + std::string(name) + "'");
}

Matrix MetaModel::Design(const Matrix& raw) const {
  Matrix z = raw_stats.Apply(raw);
  if (poly2) z = Poly2Features(z);
  return expanded_stats.Apply(z);
}

Vector MetaModel::Predict(const Matrix& raw) const {
  const Matrix design = Design(raw);
  Vector out(raw.rows());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    out(i) = intercept + (family == ModelFamily::kTree ? tree.Predict(design.row(i))
                                                       : design.row(i).dot(beta));
  }
  return out;
}

std::vector<std::string> MetaModel::ExpandedNames() const {
  return poly2 ? Poly2Names(raw_names) : raw_names;
}

double SelectLambda(const Matrix& x, const Vector& y, const MetaHyper& hyper) {
  const Eigen::Index n = x.rows();
  if (n < 3) throw Error("too_few_rows", "lambda selection needs >= 3 rows");
  MetaModel probe;
  probe.poly2 = hyper.poly2;
  const Matrix design = Prepare(probe, x);
  const double lambda_max = LassoLambdaMax(design, y.array() - y.mean());
  if (lambda_max <= 0.0) return 0.0;
  const auto grid = LambdaGrid(lambda_max, hyper.n_lambdas, hyper.lambda_ratio);

  std::vector<std::vector<double>> sq_err(n, std::vector<double>(grid.size()));
  ParallelFor(static_cast<size_t>(n), hyper.jobs, [&](size_t i) {
    const auto fold = static_cast<Eigen::Index>(i);
    MetaModel m;
    m.poly2 = hyper.poly2;
    const Matrix train = Prepare(m, DropRow(x, fold));
    const Vector yt = DropRow(y, fold);
    const double mean = yt.mean();
    const Vector yc = yt.array() - mean;
    const Matrix row = m.Design(x.row(fold));
    Vector beta = Vector::Zero(train.cols());
    for (size_t l = 0; l < grid.size(); ++l) {
      beta = FitLasso(train, yc, grid[l], hyper.lasso, &beta).beta;
      const double err = mean + row.row(0).dot(beta) - y(fold);
      sq_err[i][l] = err * err;
    }
  });
  size_t best = 0;
  double best_err = 0.0;
  for (size_t l = 0; l < grid.size(); ++l) {
    CompensatedSum total;
    for (Eigen::Index i = 0; i < n; ++i) total.Add(sq_err[i][l]);
    if (l == 0 || total.Total() < best_err) {
      best = l;
      best_err = total.Total();
    }
  }
  return grid[best];
}

MetaModel FitMetaModel(const Matrix& x, const Vector& y,
                       const std::vector<std::string>& names,
                       const MetaHyper& hyper) {
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw Error("dimension", "feature names do not match columns");
  }
  if (x.rows() != y.size() || y.size() == 0) throw Error("dimension", "bad meta data");
  MetaModel model;
  model.family = hyper.family;
  model.poly2 = hyper.poly2;
  model.raw_names = names;
  const Matrix design = Prepare(model, x);
  model.intercept = y.mean();
  const Vector yc = y.array() - model.intercept;
  model.beta = Vector::Zero(design.cols());
  if (yc.cwiseAbs().maxCoeff() == 0.0) return model;  // nothing to learn

  switch (hyper.family) {
    case ModelFamily::kLasso:
      model.lambda = hyper.lambda ? *hyper.lambda : SelectLambda(x, y, hyper);
      model.beta = FitLasso(design, yc, model.lambda, hyper.lasso).beta;
      break;
    case ModelFamily::kOls:
      model.beta = FitOls(design, yc);
      break;
    case ModelFamily::kTree:
      model.tree = FitTree(design, yc, hyper.max_depth, hyper.min_leaf);
      break;
  }
  return model;
}

Vector Loocv(const Matrix& x, const Vector& y,
             const std::vector<std::string>& names, const MetaHyper& hyper) {
  const Eigen::Index n = x.rows();
  if (n < 3) throw Error("too_few_rows", "leave-one-out needs >= 3 rows");
  Vector out(n);
  MetaHyper inner = hyper;
  inner.jobs = 1;
  ParallelFor(static_cast<size_t>(n), hyper.jobs, [&](size_t i) {
    const auto fold = static_cast<Eigen::Index>(i);
    const MetaModel m = FitMetaModel(DropRow(x, fold), DropRow(y, fold), names, inner);
    out(fold) = m.Predict(x.row(fold))(0);
  });
  return out;
}

RSquared ComputeR2(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw Error("dimension", "length mismatch");
  RSquared r;
  if (y.empty()) {
    r.degenerate = true;
    return r;
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  bool constant_prediction = true;
  for (size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    if (yhat[i] != yhat[0]) constant_prediction = false;
  }
  if (ss_tot == 0.0 || constant_prediction) {
    r.degenerate = true;
    return r;
  }
  r.value = 1.0 - ss_res / ss_tot;
  return r;
}

KendallResult KendallTauB(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("dimension", "length mismatch");
  const size_t n = x.size();
  KendallResult res;
  if (n < 2) {
    res.degenerate = true;
    return res;
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  int64_t n1 = 0, n3 = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    n1 += PairsIn(static_cast<int64_t>(j - i));
    for (size_t a = i; a < j;) {
      size_t b = a;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      n3 += PairsIn(static_cast<int64_t>(b - a));
      a = b;
    }
    i = j;
  }
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const int64_t swaps = CountInversions(ys);
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  const auto x_ties = TieGroups(xs);
  const auto y_ties = TieGroups(ys);
  int64_t n2 = 0;
  for (auto t : y_ties) n2 += PairsIn(t);
  const int64_t n0 = PairsIn(static_cast<int64_t>(n));
  const int64_t s = n0 - n1 - n2 + n3 - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (denom == 0.0) {
    res.degenerate = true;
    return res;
  }
  res.tau_b = static_cast<double>(s) / denom;

  if (n <= 8) {
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const int64_t observed = std::abs(BruteS(x, y, perm));
    int64_t extreme = 0, total = 0;
    do {
      ++total;
      if (std::abs(BruteS(x, y, perm)) >= observed) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return res;
  }
  const double dn = static_cast<double>(n);
  double vt = 0.0, vu = 0.0, t1 = 0.0, u1 = 0.0, t2 = 0.0, u2 = 0.0;
  for (auto t : x_ties) {
    const double d = static_cast<double>(t);
    vt += d * (d - 1) * (2 * d + 5);
    t1 += d * (d - 1);
    t2 += d * (d - 1) * (d - 2);
  }
  for (auto u : y_ties) {
    const double d = static_cast<double>(u);
    vu += d * (d - 1) * (2 * d + 5);
    u1 += d * (d - 1);
    u2 += d * (d - 1) * (d - 2);
  }
  const double var = (dn * (dn - 1) * (2 * dn + 5) - vt - vu) / 18.0 +
                     t1 * u1 / (2.0 * dn * (dn - 1)) +
                     t2 * u2 / (9.0 * dn * (dn - 1) * (dn - 2));
  if (var <= 0.0) return res;
  const double z = static_cast<double>(s) / std::sqrt(var);
  res.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  return res;
}

PredictionScore ScorePredictions(std::span<const double> y,
                                 std::span<const double> yhat) {
  if (y.size() < 3) throw Error("too_few_rows", "scoring needs >= 3 rows");
  return {ComputeR2(y, yhat), KendallTauB(y, yhat)};
}

// ---------------------------------------------------------------------------
// Meta dataset

Matrix MetaDataset::Features() const {
  Matrix x(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(feature_names.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < feature_names.size(); ++j) x(i, j) = rows[i].features[j];
  }
  return x;
}

Vector MetaDataset::Target(std::string_view target) const {
  if (target != "ctr" && target != "vrr") {
    throw Error("config", "unknown target '" + std::string(target) + "'");
  }
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    y(i) = target == "ctr" ? rows[i].ctr : rows[i].vrr;
  }
  return y;
}

std::optional<int> SegmentCode(Segment s) {
  switch (s) {
    case Segment::kS1_2:
      return 1;
    case Segment::kS3_5:
      return 2;
    case Segment::kS6_15:
      return 3;
    default:
      return std::nullopt;
  }
}

std::vector<std::string> MetaFeatureNames() {
  std::vector<std::string> names(kMetricNames.begin(), kMetricNames.end());
  names.emplace_back("segment_code");
  return names;
}

MetaDataset BuildMetaDataset(const std::vector<OfflineReport>& offline,
                             const std::vector<OnlineReport>& online,
                             const std::vector<Segment>& segments) {
  std::map<std::string, const OfflineReport*> by_id;
  for (const auto& r : offline) by_id[r.variant_id] = &r;
  std::map<std::pair<std::string, int>, const OnlineReport*> cells;
  for (const auto& r : online) cells[{r.variant_id, static_cast<int>(r.segment)}] = &r;

  MetaDataset data;
  data.feature_names = MetaFeatureNames();
  for (const auto& [id, report] : by_id) {
    for (Segment s : segments) {
      const auto code = SegmentCode(s);
      if (!code) throw Error("config", "segment has no ordinal code");
      auto it = cells.find({id, static_cast<int>(s)});
      if (it == cells.end() || it->second->impressions == 0) continue;
      MetaRow row;
      row.variant_id = id;
      row.segment = s;
      row.features.assign(report->means.begin(), report->means.end());
      row.features.push_back(*code);
      row.ctr = it->second->ctr;
      row.vrr = it->second->vrr;
      data.rows.push_back(std::move(row));
    }
  }
  return data;
}

void WriteMetaDataset(const MetaDataset& data, const std::filesystem::path& path) {
  CsvWriter out(path);
  std::vector<std::string> header{"variant_id", "segment"};
  header.insert(header.end(), data.feature_names.begin(), data.feature_names.end());
  header.insert(header.end(), {"ctr", "vrr"});
  out.Row(header);
  for (const auto& r : data.rows) {
    std::vector<std::string> row{r.variant_id, std::string(SegmentName(r.segment))};
    for (double v : r.features) row.push_back(FormatDouble(v));
    row.push_back(FormatDouble(r.ctr));
    row.push_back(FormatDouble(r.vrr));
    out.Row(row);
  }
}

MetaDataset LoadMetaDataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("missing_artifact", "missing " + path.string());
  }
  auto in = OpenForRead(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row.size() < 5 || row[0] != "variant_id" ||
      row[1] != "segment" || row[row.size() - 2] != "ctr" || row.back() != "vrr") {
    throw Error("header", path.string() + ": unexpected meta dataset header");
  }
  MetaDataset data;
  data.feature_names.assign(row.begin() + 2, row.end() - 2);
  const size_t width = row.size();
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != width) throw Error("schema", path.string() + ": wrong field count");
    MetaRow r;
    r.variant_id = row[0];
    const auto segment = ParseSegment(row[1]);
    if (!segment) throw Error("schema", "unknown segment '" + row[1] + "'");
    r.segment = *segment;
    for (size_t j = 2; j + 2 < width; ++j) {
      r.features.push_back(std::strtod(row[j].c_str(), nullptr));
    }
    r.ctr = std::strtod(row[width - 2].c_str(), nullptr);
    r.vrr = std::strtod(row[width - 1].c_str(), nullptr);
    data.rows.push_back(std::move(r));
  }
  return data;
}

std::vector<RankedVariant> RankAllVariants(const MetaModel& model,
                                           const std::vector<OfflineReport>& grid,
                                           Segment segment) {
  if (model.raw_names != MetaFeatureNames()) {
    throw Error("feature_mismatch", "model was not trained on the meta features");
  }
  const auto code = SegmentCode(segment);
  if (!code) throw Error("config", "segment has no ordinal code");
  Matrix raw(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(kNumMetrics + 1));
  for (size_t i = 0; i < grid.size(); ++i) {
    for (size_t m = 0; m < kNumMetrics; ++m) raw(i, m) = grid[i].means[m];
    raw(i, kNumMetrics) = *code;
  }
  const Vector pred = model.Predict(raw);
  std::vector<RankedVariant> out;
  for (size_t i = 0; i < grid.size(); ++i) {
    out.push_back({grid[i].variant_id, segment, std::clamp(pred(i), 0.0, 1.0)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.predicted != b.predicted ? a.predicted > b.predicted
                                      : a.variant_id < b.variant_id;
  });
  return out;
}

void WriteMetaModel(const MetaModel& model, const PredictionScore& score,
                    const std::filesystem::path& path) {
  using Json = nlohmann::ordered_json;
  auto vec = [](const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  Json j;
  j["family"] = ModelFamilyName(model.family);
  j["poly2"] = model.poly2;
  j["lambda"] = model.lambda;
  j["intercept"] = model.intercept;
  j["raw_features"] = model.raw_names;
  j["raw_mean"] = vec(model.raw_stats.mean);
  j["raw_stddev"] = vec(model.raw_stats.stddev);
  j["expanded_features"] = model.ExpandedNames();
  j["expanded_mean"] = vec(model.expanded_stats.mean);
  j["expanded_stddev"] = vec(model.expanded_stats.stddev);
  j["coefficients"] = vec(model.beta);
  Json nodes = Json::array();
  for (const auto& n : model.tree.nodes) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                     {"left", n.left}, {"right", n.right}, {"value", n.value}});
  }
  j["tree"] = nodes;
  j["loocv"] = {{"r2", score.r2.value},
                {"r2_degenerate", score.r2.degenerate},
                {"tau_b", score.kendall.tau_b},
                {"p_value", score.kendall.p_value}};
  WriteFileBytes(path, j.dump(2) + "\n");
}

void WriteRankedVariants(const std::vector<RankedVariant>& rows,
                         const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row({"segment", "rank", "variant_id", "predicted"});
  size_t rank = 0;
  Segment last = Segment::kAll;
  for (const auto& r : rows) {
    if (r.segment != last) rank = 0;
    last = r.segment;
    out.Row({std::string(SegmentName(r.segment)), std::to_string(++rank),
             r.variant_id, FormatDouble(r.predicted)});
  }
}

}  // namespace recolab
