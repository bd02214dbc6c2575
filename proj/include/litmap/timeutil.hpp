// Copyright 2026 The Litmap Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace litmap {

/// Seconds since 1970-01-01T00:00:00Z.
using EpochSeconds = std::int64_t;

inline constexpr EpochSeconds kSecondsPerDay = 86400;

/// Parses exactly "YYYY-MM-DDTHH:MM:SSZ". Returns nullopt on any deviation.
std::optional<EpochSeconds> parse_utc(std::string_view text);
std::string format_utc(EpochSeconds t);

/// Day index since epoch (floor division).
inline std::int64_t epoch_day(EpochSeconds t) {
  return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

/// 0 = Monday ... 6 = Sunday.
int weekday(EpochSeconds t);

/// Half-open observation window [start, start + days).
struct ObservationWindow {
  EpochSeconds start = 0;
  int days = 0;

  EpochSeconds end() const { return start + static_cast<EpochSeconds>(days) * kSecondsPerDay; }
  bool contains(EpochSeconds t) const { return t >= start && t < end(); }
};

}  // namespace litmap
