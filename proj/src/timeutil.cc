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

#include "recolab/timeutil.h"

#include <cctype>
#include <cstdio>

#include "recolab/common.h"

namespace recolab {
namespace {

using std::chrono::days;
using std::chrono::hours;
using std::chrono::minutes;
using std::chrono::seconds;

bool ReadDigits(std::string_view s, size_t pos, size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::optional<Date> ParseDatePrefix(std::string_view s) {
  int y, m, d;
  if (!ReadDigits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' ||
      !ReadDigits(s, 5, 2, m) || s[7] != '-' || !ReadDigits(s, 8, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
      std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(ymd);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<Instant> TryParseInstant(std::string_view text) {
  const std::string_view s = Trim(text);
  const auto date = ParseDatePrefix(s);
  if (!date) return std::nullopt;
  Instant t(*date);
  size_t pos = 10;
  if (pos == s.size()) return t;
  if (s[pos] == 'T' || s[pos] == ' ') {
    int hh, mm, ss;
    if (!ReadDigits(s, pos + 1, 2, hh) || pos + 3 >= s.size() ||
        s[pos + 3] != ':' || !ReadDigits(s, pos + 4, 2, mm) ||
        pos + 6 >= s.size() || s[pos + 6] != ':' ||
        !ReadDigits(s, pos + 7, 2, ss)) {
      return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    t += hours(hh) + minutes(mm) + seconds(ss);
    pos += 9;
    // Fractional seconds are truncated.
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
        ++pos;
    }
  }
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 &&
      s[pos + 3] == ':') {
    int oh, om;
    if (!ReadDigits(s, pos + 1, 2, oh) || !ReadDigits(s, pos + 4, 2, om))
      return std::nullopt;
    const seconds offset = hours(oh) + minutes(om);
    return s[pos] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

Instant ParseInstant(std::string_view text) {
  auto t = TryParseInstant(text);
  if (!t) throw Error("time", "invalid ISO-8601 instant: '" +
                                  std::string(text) + "'");
  return *t;
}

std::optional<Date> TryParseDate(std::string_view text) {
  const std::string_view s = Trim(text);
  if (s.size() != 10) return std::nullopt;
  return ParseDatePrefix(s);
}

Date ParseDate(std::string_view text) {
  auto d = TryParseDate(text);
  if (!d) throw Error("time", "invalid date: '" + std::string(text) + "'");
  return *d;
}

std::string FormatInstant(Instant t) {
  const Date d = std::chrono::floor<days>(t);
  const std::chrono::year_month_day ymd(d);
  const std::chrono::hh_mm_ss<seconds> hms(t - Instant(d));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string FormatDate(Date d) {
  const std::chrono::year_month_day ymd(d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

int64_t WholeDaysBetween(Instant from, Instant to) {
  return std::chrono::floor<days>(to - from).count();
}

}  // namespace recolab
