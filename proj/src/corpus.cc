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

#include "recolab/corpus.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "recolab/common.h"
#include "recolab/csv.h"

namespace recolab {
namespace {

struct EventHash {
  size_t operator()(const Interaction& e) const {
    uint64_t h = Fnv1a64(e.user_id);
    h = Fnv1a64(e.item_id, h ^ 0x1f);
    h ^= static_cast<uint64_t>(e.timestamp.time_since_epoch().count()) *
         0x9e3779b97f4a7c15ULL;
    h ^= static_cast<uint64_t>(e.kind);
    return static_cast<size_t>(h);
  }
};

std::optional<double> ParseNumber(std::string_view text) {
  std::string s(text);
  if (s.empty() || s == "NA" || s == "null" || s == "NaN") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw Error("schema", "not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::optional<EventKind> ParseEventKind(std::string_view text) {
  if (text == "detail_view") return EventKind::kDetailView;
  if (text == "rec_click") return EventKind::kRecClick;
  if (text == "purchase") return EventKind::kPurchase;
  return std::nullopt;
}

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kDetailView:
      return "detail_view";
    case EventKind::kRecClick:
      return "rec_click";
    case EventKind::kPurchase:
      return "purchase";
  }
  return "?";
}

InteractionLog ParseInteractions(std::istream& in, bool strict,
                                 LoadStats* stats) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.Next(row) ||
      row != std::vector<std::string>{"user_id", "item_id", "timestamp", "kind"}) {
    throw Error("header",
                "interactions header must be user_id,item_id,timestamp,kind");
  }
  LoadStats local;
  InteractionLog log;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    ++local.rows;
    std::optional<Instant> ts;
    std::optional<EventKind> kind;
    if (row.size() == 4 && !row[0].empty() && !row[1].empty()) {
      ts = TryParseInstant(row[2]);
      kind = ParseEventKind(row[3]);
    }
    if (!ts || !kind) {
      ++local.malformed;
      if (strict) {
        throw Error("malformed", "malformed interaction at line " +
                                     std::to_string(reader.line()));
      }
      continue;
    }
    log.events.push_back({row[0], row[1], *ts, *kind});
  }
  NormalizeLog(log, &local.duplicates);
  if (stats) *stats = local;
  return log;
}

InteractionLog LoadInteractions(const std::filesystem::path& path, bool strict,
                                LoadStats* stats) {
  auto in = OpenForRead(path);
  return ParseInteractions(in, strict, stats);
}

void WriteInteractions(const InteractionLog& log,
                       const std::filesystem::path& path) {
  CsvWriter out(path);
  out.Row({"user_id", "item_id", "timestamp", "kind"});
  for (const auto& e : log.events) {
    out.Row({e.user_id, e.item_id, FormatInstant(e.timestamp),
             std::string(EventKindName(e.kind))});
  }
}

void NormalizeLog(InteractionLog& log, size_t* duplicates) {
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const Interaction& a, const Interaction& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::unordered_set<Interaction, EventHash> seen;
  seen.reserve(log.events.size());
  size_t removed = 0;
  std::vector<Interaction> kept;
  kept.reserve(log.events.size());
  for (auto& e : log.events) {
    if (seen.insert(e).second) {
      kept.push_back(std::move(e));
    } else {
      ++removed;
    }
  }
  log.events = std::move(kept);
  if (duplicates) *duplicates = removed;
}

InteractionLog FilterUsers(const InteractionLog& log, int min_visits,
                           int max_visits, VisitCounting counting) {
  if (min_visits < 1) throw Error("config", "min_visits must be >= 1");
  std::unordered_map<std::string, std::set<std::string>> distinct;
  std::unordered_map<std::string, long> raw;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::kDetailView) continue;
    if (counting == VisitCounting::kDistinctItems) {
      distinct[e.user_id].insert(e.item_id);
    } else {
      ++raw[e.user_id];
    }
  }
  auto count_of = [&](const std::string& user) -> long {
    if (counting == VisitCounting::kDistinctItems) {
      auto it = distinct.find(user);
      return it == distinct.end() ? 0 : static_cast<long>(it->second.size());
    }
    auto it = raw.find(user);
    return it == raw.end() ? 0 : it->second;
  };
  InteractionLog out;
  for (const auto& e : log.events) {
    const long n = count_of(e.user_id);
    if (n >= min_visits && n <= max_visits) out.events.push_back(e);
  }
  return out;
}

SplitCorpus TemporalSplit(const InteractionLog& log, Instant split_point) {
  if (log.empty() || split_point < log.events.front().timestamp ||
      split_point > log.events.back().timestamp) {
    throw Error("split", "split point " + FormatInstant(split_point) +
                             " outside the log's time range");
  }
  SplitCorpus split;
  split.split_point = split_point;
  std::unordered_set<std::string> train_users;
  for (const auto& e : log.events) {
    if (e.timestamp < split_point) {
      split.train.events.push_back(e);
      train_users.insert(e.user_id);
    }
  }
  std::set<std::string> dropped_users;
  for (const auto& e : log.events) {
    if (e.timestamp < split_point) continue;
    if (train_users.contains(e.user_id)) {
      split.test.events.push_back(e);
    } else {
      ++split.dropped_test_events;
      dropped_users.insert(e.user_id);
    }
  }
  split.dropped_test_users = dropped_users.size();
  return split;
}

std::map<std::string, UserProfile> BuildProfiles(const InteractionLog& log,
                                                 Instant as_of) {
  std::map<std::string, UserProfile> profiles;
  for (const auto& e : log.events) {
    auto& p = profiles[e.user_id];
    if (p.user_id.empty()) p.user_id = e.user_id;
    if (e.kind == EventKind::kDetailView && e.timestamp < as_of) {
      p.visits.push_back({e.item_id, e.timestamp});
    }
  }
  return profiles;
}

// ---------------------------------------------------------------------------

Catalog::Catalog(CatalogSchema schema, std::map<std::string, ItemRecord> items)
    : schema_(std::move(schema)) {
  ids_.reserve(items.size());
  records_.reserve(items.size());
  for (auto& [id, record] : items) {
    index_.emplace(id, static_cast<int>(ids_.size()));
    ids_.push_back(id);
    records_.push_back(std::move(record));
  }
}

std::optional<int> Catalog::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ItemRecord& Catalog::item(std::string_view id) const {
  auto idx = IndexOf(id);
  if (!idx) throw Error("unknown_item", "unknown item '" + std::string(id) + "'");
  return records_[*idx];
}

CatalogSchema LoadSchema(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFileBytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema", path.string() + ": " + e.what());
  }
  CatalogSchema schema;
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw Error("schema", path.string() + ": missing 'attributes' array");
  }
  std::set<std::string> names;
  for (const auto& a : j["attributes"]) {
    AttributeDecl decl;
    decl.name = a.at("name").get<std::string>();
    const auto type = a.at("type").get<std::string>();
    if (type == "nominal") {
      decl.type = AttributeType::kNominal;
    } else if (type == "numeric") {
      decl.type = AttributeType::kNumeric;
    } else {
      throw Error("schema", "attribute '" + decl.name +
                                "' has unknown type '" + type + "'");
    }
    if (!names.insert(decl.name).second) {
      throw Error("schema", "duplicate attribute '" + decl.name + "'");
    }
    schema.attributes.push_back(std::move(decl));
  }
  schema.last_update_column = j.value("last_update", "last_update");
  return schema;
}

void WriteSchema(const CatalogSchema& schema,
                 const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["attributes"] = nlohmann::ordered_json::array();
  for (const auto& a : schema.attributes) {
    j["attributes"].push_back(
        {{"name", a.name},
         {"type", a.type == AttributeType::kNominal ? "nominal" : "numeric"}});
  }
  j["last_update"] = schema.last_update_column;
  WriteFileBytes(path, j.dump(2) + "\n");
}

Catalog LoadCatalog(const std::filesystem::path& attributes_csv,
                    const std::filesystem::path& schema_json,
                    const std::filesystem::path& descriptions_csv,
                    const TextNormalizer& normalizer) {
  CatalogSchema schema = LoadSchema(schema_json);

  auto in = OpenForRead(attributes_csv);
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.Next(header) || header.empty() || header[0] != "item_id") {
    throw Error("header", attributes_csv.string() +
                              ": first column must be item_id");
  }
  std::unordered_map<std::string, size_t> column;
  for (size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const auto& a : schema.attributes) {
    if (!column.contains(a.name)) {
      throw Error("schema", "declared attribute '" + a.name +
                                "' missing from " + attributes_csv.string());
    }
  }
  if (!column.contains(schema.last_update_column)) {
    throw Error("schema", "last_update column '" + schema.last_update_column +
                              "' missing from " + attributes_csv.string());
  }
  const size_t last_update_col = column[schema.last_update_column];

  std::map<std::string, ItemRecord> items;
  std::vector<std::string> row;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw Error("schema", attributes_csv.string() + ": line " +
                                std::to_string(reader.line()) +
                                " has wrong field count");
    }
    ItemRecord record;
    for (const auto& a : schema.attributes) {
      const std::string& cell = row[column[a.name]];
      if (a.type == AttributeType::kNominal) {
        record.nominal[a.name] = cell.empty() ? "NA" : cell;
      } else {
        record.numeric[a.name] = ParseNumber(cell);
      }
    }
    record.last_update = ParseDate(row[last_update_col].substr(
        0, std::min<size_t>(10, row[last_update_col].size())));
    if (!items.emplace(row[0], std::move(record)).second) {
      throw Error("schema", "duplicate item_id '" + row[0] + "'");
    }
  }

  auto din = OpenForRead(descriptions_csv);
  CsvReader dreader(din);
  if (!dreader.Next(header) ||
      header != std::vector<std::string>{"item_id", "text"}) {
    throw Error("header", descriptions_csv.string() +
                              ": header must be item_id,text");
  }
  while (dreader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2) {
      throw Error("schema", descriptions_csv.string() + ": line " +
                                std::to_string(dreader.line()) +
                                " has wrong field count");
    }
    auto it = items.find(row[0]);
    if (it == items.end()) continue;
    it->second.description_tokens = normalizer.Normalize(row[1]);
  }
  return Catalog(std::move(schema), std::move(items));
}

}  // namespace recolab
