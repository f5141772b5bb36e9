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

#ifndef RECOLAB_TIMEUTIL_H_
#define RECOLAB_TIMEUTIL_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace recolab {

// UTC instant at second precision.
using Instant = std::chrono::sys_seconds;
// UTC calendar date (midnight).
using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" (or a space instead of 'T'),
// optionally followed by 'Z' or a "+HH:MM"/"-HH:MM" offset.
std::optional<Instant> TryParseInstant(std::string_view text);
Instant ParseInstant(std::string_view text);  // throws Error("time")

std::optional<Date> TryParseDate(std::string_view text);
Date ParseDate(std::string_view text);

std::string FormatInstant(Instant t);  // YYYY-MM-DDTHH:MM:SSZ
std::string FormatDate(Date d);        // YYYY-MM-DD

// floor((to - from) / 1 day); negative when `to` precedes `from`.
int64_t WholeDaysBetween(Instant from, Instant to);

inline Instant ToInstant(Date d) { return Instant(d); }

}  // namespace recolab

#endif  // RECOLAB_TIMEUTIL_H_
