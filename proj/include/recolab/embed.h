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

// Skip-gram with negative sampling over visit sequences, and a
// distributed-bag-of-words document model over item descriptions.

#ifndef RECOLAB_EMBED_H_
#define RECOLAB_EMBED_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recolab/corpus.h"

namespace recolab {

struct TrainSpec {
  int epochs = 15;
  int negatives = 5;
  double initial_lr = 0.025;
  double min_lr = 1e-4;
  double noise_exponent = 0.75;
  uint64_t seed = 1;

  void Validate() const;  // throws Error("config")
};

enum class EmbeddingKind { kSessionW2v, kDocD2v };

std::string_view EmbeddingKindName(EmbeddingKind kind);

// One row per item, aligned with `item_ids`. Cold items hold the zero vector.
struct EmbeddingModel {
  EmbeddingKind kind = EmbeddingKind::kSessionW2v;
  int dim = 0;
  int window = 0;
  std::vector<std::string> item_ids;
  std::vector<double> vectors;  // row-major, item_ids.size() x dim
  std::vector<bool> cold;
  double final_loss = 0.0;

  size_t size() const { return item_ids.size(); }
  std::span<const double> row(size_t i) const {
    return {vectors.data() + i * dim, static_cast<size_t>(dim)};
  }
};

// Loss and gradients of
//   -log s(context . center) - sum_n log s(-n . center)
// with s the logistic function.
struct SgnsGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

SgnsGradient SgnsLossAndGrad(std::span<const double> center,
                             std::span<const double> context,
                             std::span<const std::span<const double>> negatives);

// Per-position document objective: the document vector predicts `target`
// (full weight) and every in-window context token predicts it with weight
// `aux_weight`. All terms share the negative samples.
struct DbowGradient {
  double loss = 0.0;
  std::vector<double> doc;
  std::vector<double> target;
  std::vector<std::vector<double>> contexts;
  std::vector<std::vector<double>> negatives;
};

DbowGradient DbowLossAndGrad(std::span<const double> doc,
                             std::span<const double> target,
                             std::span<const std::span<const double>> contexts,
                             std::span<const std::span<const double>> negatives,
                             double aux_weight);

// Positive (center, context) pairs within `window` positions of one sequence.
std::vector<std::pair<int, int>> WindowPairs(std::span<const int> sequence,
                                             int window);

// Unigram counts raised to `exponent`, normalized to sum to one.
std::vector<double> NoiseDistribution(std::span<const double> counts,
                                      double exponent);

// Core trainer over item-index sequences; items never seen are cold.
EmbeddingModel FitSessionEmbeddings(
    const std::vector<std::vector<int>>& sequences,
    const std::vector<std::string>& item_ids, int dim, int window,
    const TrainSpec& spec);

// Sequences are each user's full ordered detail-view stream restricted to
// catalog items.
EmbeddingModel FitSessionEmbeddings(const InteractionLog& train,
                                    const Catalog& catalog, int dim, int window,
                                    const TrainSpec& spec);

EmbeddingModel FitDocEmbeddings(
    const std::vector<std::vector<std::string>>& documents,
    const std::vector<std::string>& item_ids, int dim, int window,
    const TrainSpec& spec);

EmbeddingModel FitDocEmbeddings(const Catalog& catalog, int dim, int window,
                                const TrainSpec& spec);

// model_{kind}_{dim}_{window}.csv plus a JSON sidecar carrying the train
// spec and the corpus hash.
std::string EmbeddingFileStem(EmbeddingKind kind, int dim, int window);
void SaveEmbeddings(const EmbeddingModel& model, const TrainSpec& spec,
                    const std::string& corpus_hash,
                    const std::filesystem::path& dir);
EmbeddingModel LoadEmbeddings(const std::filesystem::path& dir,
                              EmbeddingKind kind, int dim, int window);

}  // namespace recolab

#endif  // RECOLAB_EMBED_H_
