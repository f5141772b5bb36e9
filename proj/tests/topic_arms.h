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

#ifndef RECOLAB_TESTS_TOPIC_ARMS_H_
#define RECOLAB_TESTS_TOPIC_ARMS_H_

#include <span>
#include <string>
#include <vector>

#include "recolab/synth.h"

namespace recolab::testing {

// Items are assigned topics round-robin.
inline std::vector<int> RoundRobinTopics(int n_items, int n_topics) {
  std::vector<int> topic(n_items);
  for (int i = 0; i < n_items; ++i) topic[i] = i % n_topics;
  return topic;
}

// Recommends k items of the profile's most visited topic shifted by
// `offset` topics. Offset 0 follows the user's taste; any other offset works
// against it. Empty profiles see topic `offset`.
inline Arm TopicArm(std::string id, std::vector<int> topic, int n_topics,
                    int offset, int k) {
  Arm arm;
  arm.variant_id = std::move(id);
  arm.recommend = [topic = std::move(topic), n_topics, offset, k](
                      std::span<const IndexedVisit> profile, Instant) {
    std::vector<int> counts(n_topics, 0);
    for (const auto& v : profile) ++counts[topic[v.item]];
    int dominant = 0;
    for (int t = 1; t < n_topics; ++t) {
      if (counts[t] > counts[dominant]) dominant = t;
    }
    const int target = (dominant + offset) % n_topics;
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(topic.size()) && static_cast<int>(out.size()) < k; ++i) {
      if (topic[i] == target) out.push_back(i);
    }
    return out;
  };
  return arm;
}

inline std::vector<std::string> PaddedIds(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    ids.push_back("p" + std::string(4 - s.size(), '0') + s);
  }
  return ids;
}

}  // namespace recolab::testing

#endif  // RECOLAB_TESTS_TOPIC_ARMS_H_
