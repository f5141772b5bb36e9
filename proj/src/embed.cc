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

#include "recolab/embed.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/rng.h"

namespace recolab {
namespace {

double Dot(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-z)) = -log s(z), computed without overflow.
double NegLogSigmoid(double z) {
  if (z >= 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

// Adds scale * gradient of one skip-gram term into the g_* buffers and
// returns scale * loss. Gradients are taken at the current parameters.
double AccumulateSgns(const double* center, const double* context,
                      const double* const* negs, int n_negs, int dim,
                      double scale, double* g_center, double* g_context,
                      double* const* g_negs) {
  const double pos = Dot(context, center, dim);
  double loss = NegLogSigmoid(pos);
  const double gpos = -(1.0 - Sigmoid(pos)) * scale;
  for (int i = 0; i < dim; ++i) {
    g_center[i] += gpos * context[i];
    g_context[i] += gpos * center[i];
  }
  for (int k = 0; k < n_negs; ++k) {
    const double z = Dot(negs[k], center, dim);
    loss += NegLogSigmoid(-z);
    const double gneg = Sigmoid(z) * scale;
    for (int i = 0; i < dim; ++i) {
      g_center[i] += gneg * negs[k][i];
      g_negs[k][i] += gneg * center[i];
    }
  }
  return scale * loss;
}

void CheckDims(size_t dim, std::span<const std::span<const double>> vs) {
  for (const auto& v : vs) {
    if (v.size() != dim) throw Error("dimension", "vector dimension mismatch");
  }
}

class NoiseSampler {
 public:
  explicit NoiseSampler(std::span<const double> probabilities) {
    cdf_.resize(probabilities.size());
    std::partial_sum(probabilities.begin(), probabilities.end(), cdf_.begin());
  }

  int Sample(Rng& rng) const {
    const double u = rng.Uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

void InitUniform(std::vector<double>& v, int dim, Rng& rng) {
  const double half = 0.5 / dim;
  for (double& x : v) x = rng.Uniform(-half, half);
}

double LearningRate(const TrainSpec& spec, double progress) {
  return spec.initial_lr - (spec.initial_lr - spec.min_lr) * progress;
}

}  // namespace

void TrainSpec::Validate() const {
  if (epochs < 1) throw Error("config", "epochs must be >= 1");
  if (negatives < 1) throw Error("config", "negatives must be >= 1");
  if (!(min_lr > 0.0) || min_lr > initial_lr) {
    throw Error("config", "learning rates must satisfy 0 < min_lr <= initial_lr");
  }
}

std::string_view EmbeddingKindName(EmbeddingKind kind) {
  return kind == EmbeddingKind::kSessionW2v ? "session_w2v" : "doc_d2v";
}

SgnsGradient SgnsLossAndGrad(std::span<const double> center,
                             std::span<const double> context,
                             std::span<const std::span<const double>> negatives) {
  const size_t dim = center.size();
  if (context.size() != dim) throw Error("dimension", "vector dimension mismatch");
  CheckDims(dim, negatives);
  SgnsGradient g;
  g.center.assign(dim, 0.0);
  g.context.assign(dim, 0.0);
  g.negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));
  std::vector<const double*> negs;
  std::vector<double*> gnegs;
  for (size_t k = 0; k < negatives.size(); ++k) {
    negs.push_back(negatives[k].data());
    gnegs.push_back(g.negatives[k].data());
  }
  g.loss = AccumulateSgns(center.data(), context.data(), negs.data(),
                          static_cast<int>(negs.size()), static_cast<int>(dim),
                          1.0, g.center.data(), g.context.data(), gnegs.data());
  return g;
}

DbowGradient DbowLossAndGrad(std::span<const double> doc,
                             std::span<const double> target,
                             std::span<const std::span<const double>> contexts,
                             std::span<const std::span<const double>> negatives,
                             double aux_weight) {
  const size_t dim = doc.size();
  if (target.size() != dim) throw Error("dimension", "vector dimension mismatch");
  CheckDims(dim, contexts);
  CheckDims(dim, negatives);
  DbowGradient g;
  g.doc.assign(dim, 0.0);
  g.target.assign(dim, 0.0);
  g.contexts.assign(contexts.size(), std::vector<double>(dim, 0.0));
  g.negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));
  std::vector<const double*> negs;
  std::vector<double*> gnegs;
  for (size_t k = 0; k < negatives.size(); ++k) {
    negs.push_back(negatives[k].data());
    gnegs.push_back(g.negatives[k].data());
  }
  const int d = static_cast<int>(dim);
  const int n = static_cast<int>(negs.size());
  g.loss = AccumulateSgns(doc.data(), target.data(), negs.data(), n, d, 1.0,
                          g.doc.data(), g.target.data(), gnegs.data());
  for (size_t j = 0; j < contexts.size(); ++j) {
    g.loss += AccumulateSgns(contexts[j].data(), target.data(), negs.data(), n,
                             d, aux_weight, g.contexts[j].data(),
                             g.target.data(), gnegs.data());
  }
  return g;
}

std::vector<std::pair<int, int>> WindowPairs(std::span<const int> sequence,
                                             int window) {
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(sequence.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - window);
    const int hi = std::min(n - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (j != i) pairs.emplace_back(sequence[i], sequence[j]);
    }
  }
  return pairs;
}

std::vector<double> NoiseDistribution(std::span<const double> counts,
                                      double exponent) {
  std::vector<double> p(counts.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    p[i] = counts[i] > 0 ? std::pow(counts[i], exponent) : 0.0;
    total += p[i];
  }
  if (total <= 0) throw Error("no_training_pairs", "empty noise distribution");
  for (double& x : p) x /= total;
  return p;
}

EmbeddingModel FitSessionEmbeddings(
    const std::vector<std::vector<int>>& sequences,
    const std::vector<std::string>& item_ids, int dim, int window,
    const TrainSpec& spec) {
  spec.Validate();
  if (dim < 1 || window < 1) throw Error("config", "dim and window must be >= 1");
  const size_t n_items = item_ids.size();
  std::vector<double> counts(n_items, 0.0);
  size_t total_positions = 0;
  for (const auto& seq : sequences) {
    if (seq.size() < 2) continue;
    for (int item : seq) counts.at(item) += 1.0;
    total_positions += seq.size();
  }
  if (total_positions == 0) {
    throw Error("no_training_pairs", "no training pairs: no sequence with >= 2 visits");
  }
  const NoiseSampler noise(NoiseDistribution(counts, spec.noise_exponent));

  Rng rng(spec.seed);
  std::vector<double> input(n_items * dim);
  InitUniform(input, dim, rng);
  std::vector<double> output(n_items * dim, 0.0);

  std::vector<double> g_center(dim), g_context(dim);
  std::vector<std::vector<double>> g_negs(spec.negatives, std::vector<double>(dim));
  std::vector<const double*> neg_ptrs(spec.negatives);
  std::vector<double*> gneg_ptrs(spec.negatives);
  std::vector<int> neg_ids(spec.negatives);

  const double total_steps = static_cast<double>(spec.epochs) * total_positions;
  double done = 0.0;
  double epoch_loss = 0.0;
  size_t epoch_pairs = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    epoch_loss = 0.0;
    epoch_pairs = 0;
    for (const auto& seq : sequences) {
      if (seq.size() < 2) continue;
      const int n = static_cast<int>(seq.size());
      for (int i = 0; i < n; ++i, done += 1.0) {
        const double lr = LearningRate(spec, done / total_steps);
        const int center = seq[i];
        double* x = &input[center * dim];
        const int lo = std::max(0, i - window);
        const int hi = std::min(n - 1, i + window);
        for (int j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const int context = seq[j];
          int n_negs = 0;
          for (int k = 0; k < spec.negatives; ++k) {
            const int s = noise.Sample(rng);
            if (s == context) continue;
            neg_ids[n_negs] = s;
            neg_ptrs[n_negs] = &output[s * dim];
            std::fill(g_negs[n_negs].begin(), g_negs[n_negs].end(), 0.0);
            gneg_ptrs[n_negs] = g_negs[n_negs].data();
            ++n_negs;
          }
          std::fill(g_center.begin(), g_center.end(), 0.0);
          std::fill(g_context.begin(), g_context.end(), 0.0);
          double* c = &output[context * dim];
          epoch_loss += AccumulateSgns(x, c, neg_ptrs.data(), n_negs, dim, 1.0,
                                       g_center.data(), g_context.data(),
                                       gneg_ptrs.data());
          ++epoch_pairs;
          for (int d = 0; d < dim; ++d) c[d] -= lr * g_context[d];
          for (int k = 0; k < n_negs; ++k) {
            double* v = &output[neg_ids[k] * dim];
            for (int d = 0; d < dim; ++d) v[d] -= lr * g_negs[k][d];
          }
          for (int d = 0; d < dim; ++d) x[d] -= lr * g_center[d];
        }
      }
    }
  }

  EmbeddingModel model;
  model.kind = EmbeddingKind::kSessionW2v;
  model.dim = dim;
  model.window = window;
  model.item_ids = item_ids;
  model.vectors = std::move(input);
  model.cold.assign(n_items, false);
  for (size_t i = 0; i < n_items; ++i) {
    if (counts[i] == 0.0) {
      model.cold[i] = true;
      std::fill_n(model.vectors.begin() + i * dim, dim, 0.0);
    }
  }
  model.final_loss = epoch_pairs ? epoch_loss / epoch_pairs : 0.0;
  return model;
}

EmbeddingModel FitSessionEmbeddings(const InteractionLog& train,
                                    const Catalog& catalog, int dim, int window,
                                    const TrainSpec& spec) {
  const Instant after_all =
      train.empty() ? Instant{} : train.events.back().timestamp + std::chrono::seconds(1);
  std::vector<std::vector<int>> sequences;
  for (const auto& [user, profile] : BuildProfiles(train, after_all)) {
    std::vector<int> seq;
    for (const auto& v : profile.visits) {
      if (auto idx = catalog.IndexOf(v.item_id)) seq.push_back(*idx);
    }
    sequences.push_back(std::move(seq));
  }
  return FitSessionEmbeddings(sequences, catalog.ids(), dim, window, spec);
}

EmbeddingModel FitDocEmbeddings(
    const std::vector<std::vector<std::string>>& documents,
    const std::vector<std::string>& item_ids, int dim, int window,
    const TrainSpec& spec) {
  spec.Validate();
  if (dim < 1 || window < 1) throw Error("config", "dim and window must be >= 1");
  if (documents.size() != item_ids.size()) {
    throw Error("dimension", "one document per item required");
  }
  std::set<std::string> vocab_set;
  for (const auto& doc : documents) vocab_set.insert(doc.begin(), doc.end());
  if (vocab_set.empty()) throw Error("empty_vocabulary", "empty vocabulary");
  const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
  std::map<std::string, int> word_index;
  for (size_t i = 0; i < vocab.size(); ++i) word_index[vocab[i]] = static_cast<int>(i);

  std::vector<std::vector<int>> docs(documents.size());
  std::vector<double> counts(vocab.size(), 0.0);
  size_t total_positions = 0;
  for (size_t d = 0; d < documents.size(); ++d) {
    for (const auto& w : documents[d]) {
      const int id = word_index[w];
      docs[d].push_back(id);
      counts[id] += 1.0;
    }
    total_positions += docs[d].size();
  }
  const NoiseSampler noise(NoiseDistribution(counts, spec.noise_exponent));

  Rng rng(spec.seed);
  const size_t n_docs = documents.size();
  std::vector<double> doc_vecs(n_docs * dim);
  InitUniform(doc_vecs, dim, rng);
  std::vector<double> word_in(vocab.size() * dim);
  InitUniform(word_in, dim, rng);
  std::vector<double> word_out(vocab.size() * dim, 0.0);

  constexpr double kAuxWeight = 0.5;
  const int max_ctx = 2 * window;
  std::vector<double> g_doc(dim), g_target(dim);
  std::vector<std::vector<double>> g_ctx(max_ctx, std::vector<double>(dim));
  std::vector<std::vector<double>> g_negs(spec.negatives, std::vector<double>(dim));
  std::vector<const double*> neg_ptrs(spec.negatives);
  std::vector<double*> gneg_ptrs(spec.negatives);
  std::vector<int> neg_ids(spec.negatives);
  std::vector<int> ctx_ids(max_ctx);

  const double total_steps = static_cast<double>(spec.epochs) * total_positions;
  double done = 0.0;
  double epoch_loss = 0.0;
  size_t epoch_positions = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    epoch_loss = 0.0;
    epoch_positions = 0;
    for (size_t d = 0; d < n_docs; ++d) {
      const auto& words = docs[d];
      const int n = static_cast<int>(words.size());
      double* dv = &doc_vecs[d * dim];
      for (int i = 0; i < n; ++i, done += 1.0) {
        const double lr = LearningRate(spec, done / total_steps);
        const int target = words[i];
        double* u = &word_out[target * dim];
        int n_negs = 0;
        for (int k = 0; k < spec.negatives; ++k) {
          const int s = noise.Sample(rng);
          if (s == target) continue;
          neg_ids[n_negs] = s;
          neg_ptrs[n_negs] = &word_out[s * dim];
          std::fill(g_negs[n_negs].begin(), g_negs[n_negs].end(), 0.0);
          gneg_ptrs[n_negs] = g_negs[n_negs].data();
          ++n_negs;
        }
        std::fill(g_doc.begin(), g_doc.end(), 0.0);
        std::fill(g_target.begin(), g_target.end(), 0.0);
        epoch_loss += AccumulateSgns(dv, u, neg_ptrs.data(), n_negs, dim, 1.0,
                                     g_doc.data(), g_target.data(),
                                     gneg_ptrs.data());
        int n_ctx = 0;
        const int lo = std::max(0, i - window);
        const int hi = std::min(n - 1, i + window);
        for (int j = lo; j <= hi; ++j) {
          if (j == i) continue;
          ctx_ids[n_ctx] = words[j];
          std::fill(g_ctx[n_ctx].begin(), g_ctx[n_ctx].end(), 0.0);
          epoch_loss += AccumulateSgns(&word_in[words[j] * dim], u,
                                       neg_ptrs.data(), n_negs, dim, kAuxWeight,
                                       g_ctx[n_ctx].data(), g_target.data(),
                                       gneg_ptrs.data());
          ++n_ctx;
        }
        ++epoch_positions;
        for (int k = 0; k < n_ctx; ++k) {
          double* v = &word_in[ctx_ids[k] * dim];
          for (int x = 0; x < dim; ++x) v[x] -= lr * g_ctx[k][x];
        }
        for (int k = 0; k < n_negs; ++k) {
          double* v = &word_out[neg_ids[k] * dim];
          for (int x = 0; x < dim; ++x) v[x] -= lr * g_negs[k][x];
        }
        for (int x = 0; x < dim; ++x) {
          u[x] -= lr * g_target[x];
          dv[x] -= lr * g_doc[x];
        }
      }
    }
  }

  EmbeddingModel model;
  model.kind = EmbeddingKind::kDocD2v;
  model.dim = dim;
  model.window = window;
  model.item_ids = item_ids;
  model.vectors = std::move(doc_vecs);
  model.cold.assign(n_docs, false);
  for (size_t d = 0; d < n_docs; ++d) {
    if (docs[d].empty()) {
      model.cold[d] = true;
      std::fill_n(model.vectors.begin() + d * dim, dim, 0.0);
    }
  }
  model.final_loss = epoch_positions ? epoch_loss / epoch_positions : 0.0;
  return model;
}

EmbeddingModel FitDocEmbeddings(const Catalog& catalog, int dim, int window,
                                const TrainSpec& spec) {
  std::vector<std::vector<std::string>> documents;
  documents.reserve(catalog.size());
  for (size_t i = 0; i < catalog.size(); ++i) {
    documents.push_back(catalog.item(static_cast<int>(i)).description_tokens);
  }
  return FitDocEmbeddings(documents, catalog.ids(), dim, window, spec);
}

std::string EmbeddingFileStem(EmbeddingKind kind, int dim, int window) {
  return "model_" + std::string(EmbeddingKindName(kind)) + "_" +
         std::to_string(dim) + "_" + std::to_string(window);
}

void SaveEmbeddings(const EmbeddingModel& model, const TrainSpec& spec,
                    const std::string& corpus_hash,
                    const std::filesystem::path& dir) {
  const std::string stem = EmbeddingFileStem(model.kind, model.dim, model.window);
  CsvWriter out(dir / (stem + ".csv"));
  std::vector<std::string> row{"item_id"};
  for (int d = 0; d < model.dim; ++d) row.push_back("v" + std::to_string(d));
  out.Row(row);
  for (size_t i = 0; i < model.size(); ++i) {
    row.assign(1, model.item_ids[i]);
    for (double v : model.row(i)) row.push_back(FormatDouble(v));
    out.Row(row);
  }
  nlohmann::ordered_json j;
  j["kind"] = EmbeddingKindName(model.kind);
  j["dim"] = model.dim;
  j["window"] = model.window;
  j["train_spec"] = {{"epochs", spec.epochs},
                     {"negatives", spec.negatives},
                     {"initial_lr", spec.initial_lr},
                     {"min_lr", spec.min_lr},
                     {"noise_exponent", spec.noise_exponent},
                     {"seed", spec.seed}};
  j["corpus_hash"] = corpus_hash;
  j["final_loss"] = model.final_loss;
  std::vector<std::string> cold;
  for (size_t i = 0; i < model.size(); ++i) {
    if (model.cold[i]) cold.push_back(model.item_ids[i]);
  }
  j["cold_items"] = cold;
  WriteFileBytes(dir / (stem + ".json"), j.dump(2) + "\n");
}

EmbeddingModel LoadEmbeddings(const std::filesystem::path& dir,
                              EmbeddingKind kind, int dim, int window) {
  const std::string stem = EmbeddingFileStem(kind, dim, window);
  const auto csv_path = dir / (stem + ".csv");
  if (!std::filesystem::exists(csv_path)) {
    throw Error("missing_artifact", "missing model " + csv_path.string());
  }
  EmbeddingModel model;
  model.kind = kind;
  model.dim = dim;
  model.window = window;
  auto in = OpenForRead(csv_path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || static_cast<int>(row.size()) != dim + 1) {
    throw Error("header", csv_path.string() + ": unexpected header");
  }
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (static_cast<int>(row.size()) != dim + 1) {
      throw Error("schema", csv_path.string() + ": wrong field count");
    }
    model.item_ids.push_back(row[0]);
    for (int d = 0; d < dim; ++d) {
      model.vectors.push_back(std::strtod(row[d + 1].c_str(), nullptr));
    }
  }
  model.cold.assign(model.size(), false);
  const auto json_path = dir / (stem + ".json");
  if (std::filesystem::exists(json_path)) {
    const auto j = nlohmann::json::parse(ReadFileBytes(json_path));
    std::set<std::string> cold(j["cold_items"].begin(), j["cold_items"].end());
    for (size_t i = 0; i < model.size(); ++i) {
      model.cold[i] = cold.contains(model.item_ids[i]);
    }
    model.final_loss = j.value("final_loss", 0.0);
  }
  return model;
}

}  // namespace recolab
