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

#include "recolab/text.h"

#include <array>

namespace recolab {
namespace {

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string StripSuffix(std::string word) {
  // Longest match first; the stem must keep at least three bytes.
  static constexpr std::array<std::string_view, 8> kSuffixes = {
      "ations", "ation", "ings", "ing", "ies", "es", "ed", "s"};
  for (std::string_view suffix : kSuffixes) {
    if (EndsWith(word, suffix) && word.size() - suffix.size() >= 3) {
      if (suffix == "s" && EndsWith(word, "ss")) return word;
      word.resize(word.size() - suffix.size());
      if (suffix == "ies") word.push_back('y');
      return word;
    }
  }
  return word;
}

std::vector<std::string> TextNormalizer::Normalize(std::string_view text) const {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!stop_words_.contains(current)) {
      std::string token =
          strip_suffixes_ ? StripSuffix(std::move(current)) : std::move(current);
      if (!token.empty() && !stop_words_.contains(token)) {
        tokens.push_back(std::move(token));
      }
    }
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : ch);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::set<std::string> TextNormalizer::DefaultStopWords() {
  return {"a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",
          "for",  "from", "has",  "in",   "is",   "it",   "its",  "of",
          "on",   "or",   "that", "the",  "this", "to",   "was",  "were",
          "with", "will", "our",  "your", "you",  "we",   "all",  "can"};
}

}  // namespace recolab
