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

#include "recolab/synth.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "recolab/common.h"
#include "recolab/csv.h"
#include "recolab/parallel.h"
#include "recolab/rng.h"

namespace recolab {
namespace {

constexpr const char* kCountries[] = {"GR", "ES", "IT", "HR", "EG", "TR"};
constexpr const char* kBoards[] = {"AI", "HB", "BB", "RO"};
constexpr char kConsonants[] = "bdfklmnprtvz";
constexpr char kVowels[] = "aeiou";

// Words built from consonant-vowel syllables survive text normalization
// unchanged.
std::string MakeWord(Rng& rng) {
  std::string w;
  for (int s = 0; s < 3; ++s) {
    w += kConsonants[rng.Below(sizeof(kConsonants) - 1)];
    w += kVowels[rng.Below(sizeof(kVowels) - 1)];
  }
  return w;
}

std::string PaddedId(char prefix, int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int Digits(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

// Index drawn proportionally to `weights`; -1 when all are zero.
int DrawWeighted(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return -1;
  double u = rng.Uniform() * total;
  for (size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> Vocabulary(Rng& rng, int n, std::set<std::string>& used) {
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < n) {
    std::string w = MakeWord(rng);
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

void WorldSpec::Validate() const {
  if (n_items < 2 || n_users < 1 || n_topics < 1 || n_topics > n_items) {
    throw Error("config", "world needs >= 2 items, >= 1 user, 1..n_items topics");
  }
  if (days < 2 || test_days < 1 || test_days >= days) {
    throw Error("config", "need 1 <= test_days < days");
  }
  if (mean_visits < 1.0 || stay_in_topic < 0.0 || stay_in_topic > 1.0) {
    throw Error("config", "bad visit parameters");
  }
}

SyntheticWorld GenerateWorld(const WorldSpec& spec) {
  spec.Validate();
  SyntheticWorld world;
  world.schema.attributes = {{"tour_type", AttributeType::kNominal},
                             {"country", AttributeType::kNominal},
                             {"board", AttributeType::kNominal},
                             {"price", AttributeType::kNumeric},
                             {"length", AttributeType::kNumeric}};
  world.schema.last_update_column = "last_update";

  Rng rng(DeriveSeed(spec.seed, 1));
  std::set<std::string> used;
  const auto shared = Vocabulary(rng, spec.shared_vocab, used);
  std::vector<std::vector<std::string>> topic_vocab;
  for (int t = 0; t < spec.n_topics; ++t) {
    topic_vocab.push_back(Vocabulary(rng, spec.vocab_per_topic, used));
  }

  const Date end = spec.start + std::chrono::days(spec.days);
  const int width = Digits(spec.n_items);
  std::vector<std::vector<int>> topic_items(spec.n_topics);
  for (int i = 0; i < spec.n_items; ++i) {
    SyntheticItem item;
    item.id = PaddedId('i', i + 1, width);
    item.topic = i % spec.n_topics;
    topic_items[item.topic].push_back(i);
    const int type = rng.Bernoulli(0.8) ? item.topic : static_cast<int>(rng.Below(spec.n_topics));
    item.fields["tour_type"] = "type" + std::to_string(type);
    item.fields["country"] = rng.Bernoulli(0.6)
                                 ? kCountries[item.topic % 6]
                                 : kCountries[rng.Below(6)];
    item.fields["board"] = rng.Bernoulli(0.05) ? "" : kBoards[rng.Below(4)];
    if (rng.Bernoulli(0.03)) {
      item.fields["price"] = "";
    } else {
      const double price = 400.0 * (1.0 + item.topic) * std::exp(0.3 * rng.Normal());
      item.fields["price"] = FormatDouble(std::round(price), 10);
    }
    item.fields["length"] = std::to_string(3 + rng.Below(12));
    item.fields["last_update"] =
        FormatDate(end - std::chrono::days(1 + rng.Below(365)));
    std::string text;
    for (int w = 0; w < spec.description_length; ++w) {
      const auto& vocab = rng.Bernoulli(0.7) ? topic_vocab[item.topic] : shared;
      if (w) text += ' ';
      text += vocab[rng.Below(vocab.size())];
    }
    item.description = std::move(text);
    world.items.push_back(std::move(item));
  }

  // Mild popularity skew inside each topic.
  std::vector<double> appeal(spec.n_items);
  for (int i = 0; i < spec.n_items; ++i) {
    appeal[i] = 1.0 / std::sqrt(1.0 + static_cast<double>(i / spec.n_topics));
  }

  const Instant t0 = ToInstant(spec.start);
  const int64_t span_s = static_cast<int64_t>(spec.days) * 86400;
  for (int u = 0; u < spec.n_users; ++u) {
    Rng urng(DeriveSeed(spec.seed, 1000 + static_cast<uint64_t>(u)));
    const std::string uid = std::to_string(u + 1);
    const int topic = static_cast<int>(urng.Below(spec.n_topics));
    world.user_archetype[uid] = topic;

    int n_visits;
    const double kind = urng.Uniform();
    if (kind < spec.one_visit_fraction) {
      n_visits = 1;
    } else if (kind < spec.one_visit_fraction + spec.heavy_fraction) {
      n_visits = 160 + static_cast<int>(urng.Below(60));
    } else {
      n_visits = 2 + urng.Geometric(1.0 / (spec.mean_visits - 1.0));
    }

    // Sessions of a few visits each, spread over the whole period.
    const int n_sessions = 1 + n_visits / 4 + urng.Geometric(0.5);
    std::vector<int64_t> starts;
    for (int i = 0; i < n_sessions; ++i) {
      starts.push_back(static_cast<int64_t>(urng.Below(span_s - 86400)));
    }
    std::sort(starts.begin(), starts.end());
    std::vector<int64_t> times;
    for (int v = 0; v < n_visits; ++v) {
      const size_t session = static_cast<size_t>(v) * starts.size() / n_visits;
      const bool first = times.empty() ||
                         static_cast<size_t>(v - 1) * starts.size() / n_visits != session;
      times.push_back(first ? starts[session]
                            : times.back() + 30 + static_cast<int64_t>(urng.Below(900)));
    }
    const auto& own = topic_items[topic];
    std::vector<double> weights(spec.n_items);
    int current = -1;
    for (int v = 0; v < n_visits; ++v) {
      int next;
      if (current < 0 && !own.empty() && urng.Bernoulli(0.7)) {
        next = own[urng.Below(own.size())];
      } else if (current >= 0 && urng.Bernoulli(spec.stay_in_topic)) {
        // Walk to a near neighbour inside the current topic.
        const auto& ring = topic_items[world.items[current].topic];
        const int pos = static_cast<int>(std::find(ring.begin(), ring.end(), current) - ring.begin());
        const int step = 1 + static_cast<int>(urng.Below(3));
        const int dir = urng.Bernoulli(0.5) ? 1 : -1;
        const int n = static_cast<int>(ring.size());
        next = ring[((pos + dir * step) % n + n) % n];
      } else {
        for (int i = 0; i < spec.n_items; ++i) {
          weights[i] = appeal[i] * (world.items[i].topic == topic ? 1.0 : 0.1);
        }
        next = DrawWeighted(urng, weights);
      }
      current = next;
      const Instant when = t0 + std::chrono::seconds(times[v]);
      world.log.events.push_back(
          {uid, world.items[current].id, when, EventKind::kDetailView});
      if (urng.Bernoulli(spec.purchase_rate)) {
        world.log.events.push_back({uid, world.items[current].id,
                                    when + std::chrono::seconds(60),
                                    EventKind::kPurchase});
      }
    }
  }
  NormalizeLog(world.log);
  world.split_point = t0 + std::chrono::days(spec.days - spec.test_days);
  return world;
}

void WriteWorld(const SyntheticWorld& world, const std::filesystem::path& dir) {
  WriteInteractions(world.log, dir / "interactions.csv");
  WriteSchema(world.schema, dir / "schema.json");
  std::vector<std::string> header{"item_id"};
  for (const auto& a : world.schema.attributes) header.push_back(a.name);
  header.push_back(world.schema.last_update_column);
  {
    CsvWriter out(dir / "catalog_attributes.csv");
    out.Row(header);
    for (const auto& item : world.items) {
      std::vector<std::string> row{item.id};
      for (size_t c = 1; c < header.size(); ++c) row.push_back(item.fields.at(header[c]));
      out.Row(row);
    }
  }
  CsvWriter out(dir / "descriptions.csv");
  out.Row({"item_id", "text"});
  for (const auto& item : world.items) out.Row({item.id, item.description});
}

PreferenceModel TopicPreferences(std::span<const int> item_topic, int n_topics,
                                 double high, double low) {
  PreferenceModel model;
  model.n_archetypes = n_topics;
  model.n_items = item_topic.size();
  model.values.resize(static_cast<size_t>(n_topics) * item_topic.size());
  for (int a = 0; a < n_topics; ++a) {
    for (size_t i = 0; i < item_topic.size(); ++i) {
      model.values[a * item_topic.size() + i] = item_topic[i] == a ? high : low;
    }
  }
  return model;
}

Arm VariantArm(const VariantConfig& variant, const RecContext& context,
               std::vector<double> popularity, int k) {
  Arm arm;
  arm.variant_id = variant.Id();
  arm.recommend = [variant, context, popularity = std::move(popularity), k](
                      std::span<const IndexedVisit> profile, Instant as_of) {
    RecList list;
    if (profile.empty()) {
      list = RankScores(popularity);
      if (k > 0 && list.entries.size() > static_cast<size_t>(k)) list.entries.resize(k);
    } else {
      list = Recommend(variant, profile, as_of, k, context);
    }
    std::vector<int> items;
    for (const auto& e : list.entries) items.push_back(e.item);
    return items;
  };
  return arm;
}

void BehaviorSpec::Validate() const {
  if (n_users < 0 || days < 1 || k < 1) throw Error("config", "bad behavior spec");
  if (mean_sessions < 1.0 || mean_session_visits < 1.0 || mean_prior_visits < 0.0) {
    throw Error("config", "session means must be >= 1");
  }
  if (visit_ratio < 0.0 || homepage_rate < 0.0 || homepage_rate > 1.0) {
    throw Error("config", "rates out of range");
  }
}

namespace {

struct UserLogs {
  std::vector<Interaction> visits;
  std::vector<Impression> impressions;
  std::vector<Click> clicks;
};

UserLogs SimulateUser(uint64_t uid, const std::vector<std::string>& item_ids,
                      const PreferenceModel& preferences, const Arm& arm,
                      const BehaviorSpec& spec) {
  Rng rng(DeriveSeed(spec.seed, uid));
  const size_t n_items = item_ids.size();
  const std::string user = std::to_string(uid);
  const int archetype = static_cast<int>(rng.Below(preferences.n_archetypes));
  const std::span<const double> p(preferences.values.data() + archetype * n_items,
                                  n_items);
  const bool indifferent =
      std::all_of(p.begin(), p.end(), [](double x) { return x <= 0.0; });
  UserLogs out;
  IndexedProfile history;  // aligned with out.visits

  auto visit = [&](int item, Instant when) {
    out.visits.push_back({user, item_ids[item], when, EventKind::kDetailView});
    history.push_back({item, when});
  };
  auto profile_at = [&](Instant as_of) {
    IndexedProfile profile;
    for (const auto& v : history) {
      if (v.timestamp < as_of) profile.push_back(v);
    }
    std::stable_sort(profile.begin(), profile.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return profile;
  };
  auto show = [&](Instant when) {
    const auto items = arm.recommend(profile_at(when), when);
    for (int item : items) {
      out.impressions.push_back({user, arm.variant_id, item_ids[item], when});
    }
    return items;
  };

  const int64_t period_s = static_cast<int64_t>(spec.days) * 86400;
  if (indifferent) {
    const Instant when = spec.start + std::chrono::seconds(rng.Below(period_s / 2));
    if (rng.Bernoulli(spec.homepage_rate)) show(when - std::chrono::seconds(30));
    visit(static_cast<int>(rng.Below(n_items)), when);
    show(when + std::chrono::seconds(1));
  } else {
    // Organic history before the period.
    const int prior = spec.mean_prior_visits > 0.0
                          ? rng.Geometric(1.0 / (1.0 + spec.mean_prior_visits))
                          : 0;
    for (int v = 0; v < prior; ++v) {
      const auto back = std::chrono::seconds(1 + rng.Below(60 * 86400));
      visit(DrawWeighted(rng, p), spec.start - back);
    }

    const int sessions = 1 + rng.Geometric(1.0 / spec.mean_sessions);
    std::vector<int64_t> starts;
    for (int s = 0; s < sessions; ++s) {
      starts.push_back(static_cast<int64_t>(rng.Below(period_s)));
    }
    std::sort(starts.begin(), starts.end());
    for (int64_t s0 : starts) {
      Instant t = spec.start + std::chrono::seconds(s0);
      if (profile_at(t).empty() && rng.Bernoulli(spec.homepage_rate)) {
        show(t);
        t += std::chrono::seconds(5);
      }
      int current = DrawWeighted(rng, p);
      visit(current, t);
      const int steps = 1 + rng.Geometric(1.0 / spec.mean_session_visits);
      for (int step = 0; step < steps + 20; ++step) {
        const Instant shown = t + std::chrono::seconds(1);
        const auto items = show(shown);
        std::optional<int> clicked;
        for (int item : items) {
          const double q = p[item];
          if (!clicked && rng.Bernoulli(q)) {
            clicked = item;
          } else if (rng.Bernoulli(std::min(1.0, spec.visit_ratio * q))) {
            const auto later = std::chrono::seconds(3600 + rng.Below(5 * 86400));
            visit(item, shown + later);
          }
        }
        t = shown + std::chrono::seconds(10 + rng.Below(600));
        // A click always lands on the item page, even on the last step.
        if (clicked) {
          out.clicks.push_back({user, arm.variant_id, item_ids[*clicked], t});
          current = *clicked;
        } else if (step + 1 < steps) {
          current = DrawWeighted(rng, p);
        } else {
          break;
        }
        visit(current, t);
      }
    }
  }
  return out;
}

}  // namespace

BehaviorLogs SimulateBehavior(const std::vector<std::string>& item_ids,
                              const PreferenceModel& preferences,
                              const std::vector<Arm>& arms,
                              const BehaviorSpec& spec) {
  spec.Validate();
  if (arms.empty()) throw Error("config", "no arms");
  if (preferences.n_items != item_ids.size() || preferences.n_archetypes < 1) {
    throw Error("dimension", "preference model does not match the catalog");
  }
  std::vector<UserLogs> users(spec.n_users);
  ParallelFor(users.size(), spec.jobs, [&](size_t u) {
    const uint64_t uid = spec.first_uid + u;
    const int bucket = AssignBucket(std::to_string(uid), static_cast<int>(arms.size()));
    users[u] = SimulateUser(uid, item_ids, preferences, arms[bucket], spec);
  });

  BehaviorLogs logs;
  for (auto& u : users) {
    for (auto& v : u.visits) logs.interactions.events.push_back(std::move(v));
    for (auto& i : u.impressions) logs.impressions.push_back(std::move(i));
    for (auto& c : u.clicks) logs.clicks.push_back(std::move(c));
  }
  auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
  std::stable_sort(logs.interactions.events.begin(), logs.interactions.events.end(), by_time);
  std::stable_sort(logs.impressions.begin(), logs.impressions.end(), by_time);
  std::stable_sort(logs.clicks.begin(), logs.clicks.end(), by_time);
  return logs;
}

}  // namespace recolab
