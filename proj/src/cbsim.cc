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

#include "recolab/cbsim.h"

#include <cmath>
#include <cstdlib>
#include <set>
#include <tuple>

#include "json.hpp"
#include "recolab/common.h"
#include "recolab/csv.h"

namespace recolab {

AttributeMatrix::AttributeMatrix(std::vector<std::string> columns,
                                 std::vector<std::string> item_ids,
                                 std::vector<double> rows,
                                 std::map<std::string, ColumnStat> numeric_stats)
    : columns_(std::move(columns)),
      item_ids_(std::move(item_ids)),
      rows_(std::move(rows)),
      numeric_stats_(std::move(numeric_stats)) {
  if (rows_.size() != columns_.size() * item_ids_.size()) {
    throw Error("dimension", "attribute matrix shape mismatch");
  }
  for (size_t i = 0; i < item_ids_.size(); ++i) {
    index_.emplace(item_ids_[i], static_cast<int>(i));
  }
}

std::optional<int> AttributeMatrix::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AttributeMatrix VectorizeAttributes(const Catalog& catalog,
                                    const std::map<std::string, double>& weights) {
  struct Column {
    std::string attr;
    std::string category;  // empty for numeric
    bool numeric;
  };
  std::vector<Column> layout;
  for (const auto& decl : catalog.schema().attributes) {
    if (decl.type == AttributeType::kNumeric) {
      layout.push_back({decl.name, "", true});
      continue;
    }
    std::set<std::string> categories;
    for (size_t i = 0; i < catalog.size(); ++i) {
      categories.insert(catalog.item(static_cast<int>(i)).nominal.at(decl.name));
    }
    for (const auto& c : categories) layout.push_back({decl.name, c, false});
  }
  std::sort(layout.begin(), layout.end(), [](const Column& a, const Column& b) {
    return std::tie(a.attr, a.category) < std::tie(b.attr, b.category);
  });

  const size_t n = catalog.size();
  const size_t width = layout.size();
  std::vector<double> rows(n * width, 0.0);
  std::vector<std::string> names;
  std::map<std::string, ColumnStat> stats;
  std::vector<std::string> warnings;
  for (size_t c = 0; c < width; ++c) {
    const Column& col = layout[c];
    const auto w_it = weights.find(col.attr);
    const double weight = w_it == weights.end() ? 1.0 : w_it->second;
    if (!col.numeric) {
      names.push_back(col.attr + "=" + col.category);
      for (size_t i = 0; i < n; ++i) {
        if (catalog.item(static_cast<int>(i)).nominal.at(col.attr) == col.category) {
          rows[i * width + c] = weight;
        }
      }
      continue;
    }
    names.push_back(col.attr);
    double sum = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < n; ++i) {
      const auto& v = catalog.item(static_cast<int>(i)).numeric.at(col.attr);
      if (v) {
        sum += *v;
        ++count;
      }
    }
    ColumnStat stat;
    if (count > 0) {
      stat.mean = sum / count;
      double ss = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const auto& v = catalog.item(static_cast<int>(i)).numeric.at(col.attr);
        if (v) ss += (*v - stat.mean) * (*v - stat.mean);
      }
      stat.stddev = std::sqrt(ss / count);
    }
    stats[col.attr] = stat;
    if (stat.stddev == 0.0) {
      warnings.push_back("numeric column '" + col.attr +
                         "' has zero variance; kept as zeros");
      continue;
    }
    for (size_t i = 0; i < n; ++i) {
      const auto& v = catalog.item(static_cast<int>(i)).numeric.at(col.attr);
      if (v) rows[i * width + c] = weight * (*v - stat.mean) / stat.stddev;
    }
  }
  AttributeMatrix m(std::move(names), catalog.ids(), std::move(rows),
                    std::move(stats));
  m.warnings = std::move(warnings);
  return m;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension", "vector dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double CbSimilarity(const AttributeMatrix& matrix, std::string_view a,
                    std::string_view b, bool allow_self) {
  const auto ia = matrix.IndexOf(a);
  const auto ib = matrix.IndexOf(b);
  if (!ia || !ib) {
    throw Error("unknown_item",
                "unknown item '" + std::string(ia ? b : a) + "'");
  }
  if (*ia == *ib) return allow_self ? 1.0 : 0.0;
  return Cosine(matrix.row(*ia), matrix.row(*ib));
}

void AttributeMatrix::Save(const std::filesystem::path& csv,
                           const std::filesystem::path& manifest) const {
  CsvWriter out(csv);
  std::vector<std::string> row{"item_id"};
  row.insert(row.end(), columns_.begin(), columns_.end());
  out.Row(row);
  for (size_t i = 0; i < size(); ++i) {
    row.assign(1, item_ids_[i]);
    for (double v : this->row(i)) row.push_back(FormatDouble(v));
    out.Row(row);
  }
  nlohmann::ordered_json j;
  j["columns"] = columns_;
  j["numeric_stats"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : numeric_stats_) {
    j["numeric_stats"][name] = {{"mean", s.mean}, {"stddev", s.stddev}};
  }
  j["warnings"] = warnings;
  WriteFileBytes(manifest, j.dump(2) + "\n");
}

AttributeMatrix AttributeMatrix::Load(const std::filesystem::path& csv,
                                      const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(csv)) {
    throw Error("missing_artifact", "missing " + csv.string());
  }
  const auto j = nlohmann::json::parse(ReadFileBytes(manifest));
  std::vector<std::string> columns = j.at("columns");
  std::map<std::string, ColumnStat> stats;
  for (const auto& [name, s] : j.at("numeric_stats").items()) {
    stats[name] = {s.at("mean").get<double>(), s.at("stddev").get<double>()};
  }
  auto in = OpenForRead(csv);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) || row.size() != columns.size() + 1 ||
      !std::equal(columns.begin(), columns.end(), row.begin() + 1)) {
    throw Error("header", csv.string() + ": columns disagree with manifest");
  }
  std::vector<std::string> ids;
  std::vector<double> values;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != columns.size() + 1) {
      throw Error("schema", csv.string() + ": wrong field count");
    }
    ids.push_back(row[0]);
    for (size_t c = 1; c < row.size(); ++c) {
      values.push_back(std::strtod(row[c].c_str(), nullptr));
    }
  }
  AttributeMatrix m(std::move(columns), std::move(ids), std::move(values),
                    std::move(stats));
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

}  // namespace recolab
