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

// Content-based item vectors: one-hot nominal attributes, standardized
// numeric attributes, cosine similarity between items.

#ifndef RECOLAB_CBSIM_H_
#define RECOLAB_CBSIM_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recolab/corpus.h"

namespace recolab {

struct ColumnStat {
  double mean = 0.0;
  double stddev = 0.0;
};

class AttributeMatrix {
 public:
  AttributeMatrix() = default;
  AttributeMatrix(std::vector<std::string> columns,
                  std::vector<std::string> item_ids, std::vector<double> rows,
                  std::map<std::string, ColumnStat> numeric_stats);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::map<std::string, ColumnStat>& numeric_stats() const {
    return numeric_stats_;
  }
  size_t width() const { return columns_.size(); }
  size_t size() const { return item_ids_.size(); }

  std::span<const double> row(size_t i) const {
    return {rows_.data() + i * width(), width()};
  }
  std::optional<int> IndexOf(std::string_view id) const;

  // Diagnostics raised while building (e.g. zero-variance columns).
  std::vector<std::string> warnings;

  // cb_matrix.csv plus a JSON manifest holding the column order and stats.
  void Save(const std::filesystem::path& csv,
            const std::filesystem::path& manifest) const;
  static AttributeMatrix Load(const std::filesystem::path& csv,
                              const std::filesystem::path& manifest);

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> item_ids_;
  std::vector<double> rows_;
  std::map<std::string, ColumnStat> numeric_stats_;
  std::unordered_map<std::string, int> index_;
};

// Columns are sorted by (attribute name, category); nominal columns are
// named "attr=category", numeric ones "attr". Numeric values are z-scored with
// the population stddev over non-null entries; nulls become 0 (the mean).
// `weights` scales every column of an attribute (default 1).
AttributeMatrix VectorizeAttributes(
    const Catalog& catalog, const std::map<std::string, double>& weights = {});

// Cosine with the zero-vector convention cos(0, x) = 0.
double Cosine(std::span<const double> a, std::span<const double> b);

// a == b yields 1 or 0 depending on allow_self. Throws Error("unknown_item").
double CbSimilarity(const AttributeMatrix& matrix, std::string_view a,
                    std::string_view b, bool allow_self);

}  // namespace recolab

#endif  // RECOLAB_CBSIM_H_
