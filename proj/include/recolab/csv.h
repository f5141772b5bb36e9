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

#ifndef RECOLAB_CSV_H_
#define RECOLAB_CSV_H_

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace recolab {

// Minimal RFC 4180 reader: quoted fields may contain commas, doubled quotes
// and newlines. A UTF-8 BOM on the first record is skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Returns false at end of input.
  bool Next(std::vector<std::string>& fields);

  // 1-based line number where the last record started.
  size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  size_t line_ = 1;
  size_t record_line_ = 0;
  bool first_ = true;
};

// Opens `path` for reading or throws Error("io").
std::ifstream OpenForRead(const std::filesystem::path& path);

class CsvWriter {
 public:
  // Creates parent directories; throws Error("io") on failure.
  explicit CsvWriter(const std::filesystem::path& path);

  void Row(const std::vector<std::string>& fields);
  // Flushes and closes; throws Error("io") if any write failed.
  void Close();

 private:
  std::ofstream out_;
};

std::string CsvEscape(std::string_view field);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace recolab

#endif  // RECOLAB_CSV_H_
