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

#ifndef RECOLAB_TEXT_H_
#define RECOLAB_TEXT_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace recolab {

// Lowercase, strip punctuation, drop stop-words, optionally strip common
// suffixes. Bytes >= 0x80 are kept as word characters so UTF-8 text
// survives intact (case folding is ASCII only).
class TextNormalizer {
 public:
  TextNormalizer() : TextNormalizer(DefaultStopWords(), true) {}
  TextNormalizer(std::set<std::string> stop_words, bool strip_suffixes)
      : stop_words_(std::move(stop_words)), strip_suffixes_(strip_suffixes) {}

  std::vector<std::string> Normalize(std::string_view text) const;

  static std::set<std::string> DefaultStopWords();

 private:
  std::set<std::string> stop_words_;
  bool strip_suffixes_;
};

// Light suffix stripper standing in for a language-specific stemmer.
std::string StripSuffix(std::string word);

inline std::vector<std::string> NormalizeText(
    std::string_view text, const TextNormalizer& normalizer = {}) {
  return normalizer.Normalize(text);
}

}  // namespace recolab

#endif  // RECOLAB_TEXT_H_
