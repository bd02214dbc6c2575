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
// Typed records for the five input files and their streaming CSV parsers.

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litmap/timeutil.hpp"

namespace litmap::ingest {

enum class Direction : std::uint8_t { kIn, kOut };
enum class Channel : std::uint8_t { kVoice, kSms, kMms, kVideo, kData, kVas };
inline constexpr int kChannelCount = 6;
enum class DeviceClass : std::uint8_t { kBasic, kFeature, kSmart };

std::string_view to_token(Direction d);
std::string_view to_token(Channel c);
std::string_view to_token(DeviceClass c);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<Channel> parse_channel(std::string_view s);
std::optional<DeviceClass> parse_device_class(std::string_view s);

inline bool has_duration(Channel c) { return c == Channel::kVoice || c == Channel::kVideo; }
inline bool has_volume(Channel c) { return c == Channel::kData; }
inline bool has_peer(Channel c) { return c != Channel::kData; }

struct CdrEvent {
  std::string subscriber_id;
  EpochSeconds timestamp = 0;
  Direction direction = Direction::kOut;
  Channel channel = Channel::kVoice;
  std::optional<std::string> peer_id;
  std::optional<std::int64_t> duration_s;
  std::optional<std::int64_t> volume_bytes;
  std::string tower_id;
  double charge = 0.0;

  bool operator==(const CdrEvent&) const = default;
};

struct TopUpEvent {
  std::string subscriber_id;
  EpochSeconds timestamp = 0;
  double amount = 0.0;

  bool operator==(const TopUpEvent&) const = default;
};

struct Tower {
  std::string tower_id;
  double longitude = 0.0;
  double latitude = 0.0;
  std::string district;

  bool operator==(const Tower&) const = default;
};

struct HandsetRecord {
  std::string subscriber_id;
  std::string manufacturer;
  std::string brand;
  bool camera_enabled = false;
  DeviceClass device_class = DeviceClass::kBasic;

  bool operator==(const HandsetRecord&) const = default;
};

struct LiteracyLabel {
  std::string subscriber_id;
  bool literate = true;  // false = illiterate = positive class

  bool operator==(const LiteracyLabel&) const = default;
};

inline constexpr std::string_view kCdrHeader =
    "subscriber_id,timestamp,direction,channel,peer_id,duration_s,volume_bytes,tower_id,charge";
inline constexpr std::string_view kTopUpHeader = "subscriber_id,timestamp,amount";
inline constexpr std::string_view kTowerHeader = "tower_id,longitude,latitude,district";
inline constexpr std::string_view kHandsetHeader =
    "subscriber_id,manufacturer,brand,camera_enabled,device_class";
inline constexpr std::string_view kLabelHeader = "subscriber_id,literate";

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct ParseOptions {
  bool strict = false;               // throw DataError on the first bad row
  std::size_t max_error_records = 1000;  // beyond this only the count grows
};

/// Every data row ends up as exactly one of: emitted, or counted in `errors`.
struct ParseStats {
  std::size_t rows = 0;
  std::size_t emitted = 0;
  std::size_t errors = 0;
  std::vector<RowError> error_records;
};

template <class T>
using Sink = std::function<void(T&&)>;

ParseStats parse_cdr(std::istream& in, const Sink<CdrEvent>& sink, const ParseOptions& opts = {});
ParseStats parse_topups(std::istream& in, const Sink<TopUpEvent>& sink,
                        const ParseOptions& opts = {});
ParseStats parse_towers(std::istream& in, const Sink<Tower>& sink, const ParseOptions& opts = {});
ParseStats parse_handsets(std::istream& in, const Sink<HandsetRecord>& sink,
                          const ParseOptions& opts = {});
ParseStats parse_labels(std::istream& in, const Sink<LiteracyLabel>& sink,
                        const ParseOptions& opts = {});

template <class T>
struct Parsed {
  std::vector<T> records;
  ParseStats stats;
};

Parsed<CdrEvent> read_cdr(const std::string& path, const ParseOptions& opts = {});
Parsed<TopUpEvent> read_topups(const std::string& path, const ParseOptions& opts = {});
Parsed<Tower> read_towers(const std::string& path, const ParseOptions& opts = {});
Parsed<HandsetRecord> read_handsets(const std::string& path, const ParseOptions& opts = {});
Parsed<LiteracyLabel> read_labels(const std::string& path, const ParseOptions& opts = {});

void write_row(std::ostream& out, const CdrEvent& e);
void write_row(std::ostream& out, const TopUpEvent& e);
void write_row(std::ostream& out, const Tower& t);
void write_row(std::ostream& out, const HandsetRecord& h);
void write_row(std::ostream& out, const LiteracyLabel& l);

template <class T>
void write_csv(std::ostream& out, std::string_view header, std::span<const T> rows) {
  out << header << '\n';
  for (const auto& r : rows) write_row(out, r);
}

struct ValidationReport {
  std::vector<std::string> missing_towers;          // referenced by events, absent from towers
  std::vector<std::string> unlabeled_subscribers;   // have events, no label
  std::vector<std::string> zero_event_subscribers;  // labeled, no events
  std::size_t out_of_window_events = 0;             // CDR + top-up rows outside the window
  std::vector<std::string> out_of_window_samples;   // a few offending subscriber@timestamp

  bool empty() const {
    return missing_towers.empty() && unlabeled_subscribers.empty() &&
           zero_event_subscribers.empty() && out_of_window_events == 0;
  }
  /// The pipeline refuses to continue when towers are unresolved.
  bool blocking() const { return !missing_towers.empty(); }
};

ValidationReport validate_bundle(std::span<const CdrEvent> events,
                                 std::span<const TopUpEvent> topups, std::span<const Tower> towers,
                                 std::span<const HandsetRecord> handsets,
                                 std::span<const LiteracyLabel> labels,
                                 const ObservationWindow& window);

}  // namespace litmap::ingest
