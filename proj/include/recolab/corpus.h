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

// Interaction logs, the item catalog, user filtering and the temporal
// train/test split.

#ifndef RECOLAB_CORPUS_H_
#define RECOLAB_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recolab/text.h"
#include "recolab/timeutil.h"

namespace recolab {

enum class EventKind { kDetailView, kRecClick, kPurchase };

std::optional<EventKind> ParseEventKind(std::string_view text);
std::string_view EventKindName(EventKind kind);

struct Interaction {
  std::string user_id;
  std::string item_id;
  Instant timestamp;
  EventKind kind = EventKind::kDetailView;

  bool operator==(const Interaction&) const = default;
};

// Events ordered by timestamp; equal timestamps keep input order.
struct InteractionLog {
  std::vector<Interaction> events;

  size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

struct LoadStats {
  size_t rows = 0;
  size_t malformed = 0;
  size_t duplicates = 0;
};

// Reads `user_id,item_id,timestamp,kind`. Malformed rows are dropped and
// counted; with `strict` any malformed row aborts with Error("malformed").
InteractionLog LoadInteractions(const std::filesystem::path& path, bool strict,
                                LoadStats* stats = nullptr);
InteractionLog ParseInteractions(std::istream& in, bool strict,
                                 LoadStats* stats = nullptr);
void WriteInteractions(const InteractionLog& log,
                       const std::filesystem::path& path);

// Stable sort by timestamp followed by removal of exact duplicates.
void NormalizeLog(InteractionLog& log, size_t* duplicates = nullptr);

enum class VisitCounting { kDistinctItems, kRawEvents };

// Keeps events of users whose detail-view count lies in
// [min_visits, max_visits].
InteractionLog FilterUsers(const InteractionLog& log, int min_visits,
                           int max_visits,
                           VisitCounting counting = VisitCounting::kDistinctItems);

struct SplitCorpus {
  InteractionLog train;
  InteractionLog test;
  Instant split_point;
  size_t dropped_test_events = 0;
  size_t dropped_test_users = 0;
};

// train: t < split_point; test: t >= split_point restricted to users with at
// least one train event. Throws Error("split") if split_point lies outside
// [first, last] event time.
SplitCorpus TemporalSplit(const InteractionLog& log, Instant split_point);

struct Visit {
  std::string item_id;
  Instant timestamp;
};

struct UserProfile {
  std::string user_id;
  std::vector<Visit> visits;  // oldest first
};

// Detail views strictly before `as_of`. Every user in the log gets an entry,
// possibly with no visits.
std::map<std::string, UserProfile> BuildProfiles(const InteractionLog& log,
                                                 Instant as_of);

// ---------------------------------------------------------------------------
// Catalog

enum class AttributeType { kNominal, kNumeric };

struct AttributeDecl {
  std::string name;
  AttributeType type = AttributeType::kNominal;
};

struct CatalogSchema {
  std::vector<AttributeDecl> attributes;
  std::string last_update_column = "last_update";
};

struct ItemRecord {
  std::map<std::string, std::string> nominal;
  std::map<std::string, std::optional<double>> numeric;
  std::vector<std::string> description_tokens;
  Date last_update;
};

// Items are addressed either by id or by dense index; indices follow
// ascending item id, so index order doubles as the id tie-break.
class Catalog {
 public:
  Catalog() = default;
  Catalog(CatalogSchema schema, std::map<std::string, ItemRecord> items);

  const CatalogSchema& schema() const { return schema_; }
  size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::optional<int> IndexOf(std::string_view id) const;
  const ItemRecord& item(int index) const { return records_[index]; }
  const ItemRecord& item(std::string_view id) const;  // throws Error("unknown_item")

 private:
  CatalogSchema schema_;
  std::vector<std::string> ids_;
  std::vector<ItemRecord> records_;
  std::unordered_map<std::string, int> index_;
};

CatalogSchema LoadSchema(const std::filesystem::path& path);
void WriteSchema(const CatalogSchema& schema, const std::filesystem::path& path);

// Reads catalog_attributes.csv (item_id + declared columns + last_update),
// descriptions.csv (item_id,text) and normalizes the text.
Catalog LoadCatalog(const std::filesystem::path& attributes_csv,
                    const std::filesystem::path& schema_json,
                    const std::filesystem::path& descriptions_csv,
                    const TextNormalizer& normalizer = {});

}  // namespace recolab

#endif  // RECOLAB_CORPUS_H_
