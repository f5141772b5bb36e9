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

#ifndef RECOLAB_COMMON_H_
#define RECOLAB_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace recolab {

// Every failure surfaced by the library carries a short machine-readable code
// (e.g. "io", "schema", "missing_artifact") next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// FNV-1a, 64 bit. Stable across platforms; used for bucketing and hashes
// embedded in artifacts.
constexpr uint64_t Fnv1a64(std::string_view data,
                           uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(uint64_t value);

// Fixed-format rendering of doubles for CSV artifacts. The default precision
// round-trips exactly through strtod.
std::string FormatDouble(double value, int precision = 17);

}  // namespace recolab

#endif  // RECOLAB_COMMON_H_
