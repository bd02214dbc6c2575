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

#include "litmap/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>
#include <variant>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"

namespace litmap::ingest {

std::string_view to_token(Direction d) { return d == Direction::kIn ? "I" : "O"; }

std::string_view to_token(Channel c) {
  switch (c) {
    case Channel::kVoice: return "VOICE";
    case Channel::kSms: return "SMS";
    case Channel::kMms: return "MMS";
    case Channel::kVideo: return "VIDEO";
    case Channel::kData: return "DATA";
    case Channel::kVas: return "VAS";
  }
  return "?";
}

std::string_view to_token(DeviceClass c) {
  switch (c) {
    case DeviceClass::kBasic: return "BASIC";
    case DeviceClass::kFeature: return "FEATURE";
    case DeviceClass::kSmart: return "SMART";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "I" || s == "IN") return Direction::kIn;
  if (s == "O" || s == "OUT") return Direction::kOut;
  return std::nullopt;
}

std::optional<Channel> parse_channel(std::string_view s) {
  for (int i = 0; i < kChannelCount; ++i) {
    const auto c = static_cast<Channel>(i);
    if (s == to_token(c)) return c;
  }
  return std::nullopt;
}

std::optional<DeviceClass> parse_device_class(std::string_view s) {
  for (auto c : {DeviceClass::kBasic, DeviceClass::kFeature, DeviceClass::kSmart})
    if (s == to_token(c)) return c;
  return std::nullopt;
}

namespace {

using Fields = std::vector<std::string_view>;

template <class T>
using RowResult = std::variant<T, std::string>;

std::string header_of(std::string_view h) { return std::string(h); }

/// Shared driver: header check, field count, per-row error discipline.
template <class T, class RowFn>
ParseStats drive(std::istream& in, std::string_view header, const Sink<T>& sink,
                 const ParseOptions& opts, RowFn&& row_fn) {
  ParseStats stats;
  csv::LineReader reader(in);
  std::string_view line;
  if (!reader.next(line)) throw DataError("missing header row; expected: " + header_of(header));
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);
  if (line != header)
    throw DataError("malformed header '" + std::string(line) + "'; expected: " + header_of(header));

  std::size_t expected = 1 + static_cast<std::size_t>(std::count(header.begin(), header.end(), ','));
  Fields fields;
  std::string scratch;
  while (reader.next(line)) {
    if (line.empty()) continue;
    ++stats.rows;
    std::string error;
    if (!csv::split(line, fields, scratch)) {
      error = "unterminated quoted field";
    } else if (fields.size() != expected) {
      error = "expected " + std::to_string(expected) + " fields, got " +
              std::to_string(fields.size());
    } else {
      auto result = row_fn(fields);
      if (auto* rec = std::get_if<T>(&result)) {
        ++stats.emitted;
        sink(std::move(*rec));
        continue;
      }
      error = std::get<std::string>(result);
    }
    if (opts.strict)
      throw DataError("line " + std::to_string(reader.line_number()) + ": " + error);
    ++stats.errors;
    if (stats.error_records.size() < opts.max_error_records)
      stats.error_records.push_back({reader.line_number(), std::move(error)});
  }
  return stats;
}

std::optional<std::int64_t> non_negative_int(std::string_view s) {
  auto v = csv::to_int(s);
  if (!v || *v < 0) return std::nullopt;
  return v;
}

}  // namespace

ParseStats parse_cdr(std::istream& in, const Sink<CdrEvent>& sink, const ParseOptions& opts) {
  return drive<CdrEvent>(in, kCdrHeader, sink, opts, [](const Fields& f) -> RowResult<CdrEvent> {
    CdrEvent e;
    if (f[0].empty()) return std::string("subscriber_id is empty");
    e.subscriber_id = f[0];
    const auto ts = parse_utc(f[1]);
    if (!ts) return "bad timestamp '" + std::string(f[1]) + "'";
    e.timestamp = *ts;
    const auto dir = parse_direction(f[2]);
    if (!dir) return "bad direction '" + std::string(f[2]) + "'";
    e.direction = *dir;
    const auto ch = parse_channel(f[3]);
    if (!ch) return "bad channel '" + std::string(f[3]) + "'";
    e.channel = *ch;
    const std::string ch_name(to_token(e.channel));

    if (has_peer(e.channel)) {
      if (f[4].empty()) return "peer_id required for " + ch_name;
      e.peer_id = std::string(f[4]);
    } else if (!f[4].empty()) {
      return "peer_id must be empty for " + ch_name;
    }
    if (has_duration(e.channel)) {
      const auto d = non_negative_int(f[5]);
      if (!d) return "duration_s must be a non-negative integer for " + ch_name;
      e.duration_s = d;
    } else if (!f[5].empty()) {
      return "duration_s must be empty for " + ch_name;
    }
    if (has_volume(e.channel)) {
      const auto v = non_negative_int(f[6]);
      if (!v) return "volume_bytes must be a non-negative integer for " + ch_name;
      e.volume_bytes = v;
    } else if (!f[6].empty()) {
      return "volume_bytes must be empty for " + ch_name;
    }
    if (f[7].empty()) return std::string("tower_id is empty");
    e.tower_id = f[7];
    const auto charge = csv::to_double(f[8]);
    if (!charge) return "bad charge '" + std::string(f[8]) + "'";
    if (*charge < 0) return std::string("charge must be non-negative");
    e.charge = *charge;
    return e;
  });
}

ParseStats parse_topups(std::istream& in, const Sink<TopUpEvent>& sink, const ParseOptions& opts) {
  return drive<TopUpEvent>(in, kTopUpHeader, sink, opts,
                           [](const Fields& f) -> RowResult<TopUpEvent> {
                             TopUpEvent t;
                             if (f[0].empty()) return std::string("subscriber_id is empty");
                             t.subscriber_id = f[0];
                             const auto ts = parse_utc(f[1]);
                             if (!ts) return "bad timestamp '" + std::string(f[1]) + "'";
                             t.timestamp = *ts;
                             const auto amount = csv::to_double(f[2]);
                             if (!amount) return "bad amount '" + std::string(f[2]) + "'";
                             if (*amount <= 0) return std::string("amount must be positive");
                             t.amount = *amount;
                             return t;
                           });
}

ParseStats parse_towers(std::istream& in, const Sink<Tower>& sink, const ParseOptions& opts) {
  std::unordered_set<std::string> seen;
  return drive<Tower>(in, kTowerHeader, sink, opts, [&](const Fields& f) -> RowResult<Tower> {
    Tower t;
    if (f[0].empty()) return std::string("tower_id is empty");
    t.tower_id = f[0];
    const auto lon = csv::to_double(f[1]);
    const auto lat = csv::to_double(f[2]);
    if (!lon || *lon < -180.0 || *lon > 180.0) return "longitude out of range: " + std::string(f[1]);
    if (!lat || *lat < -90.0 || *lat > 90.0) return "latitude out of range: " + std::string(f[2]);
    t.longitude = *lon;
    t.latitude = *lat;
    t.district = f[3];
    if (!seen.insert(t.tower_id).second) throw DataError("duplicate tower_id '" + t.tower_id + "'");
    return t;
  });
}

ParseStats parse_handsets(std::istream& in, const Sink<HandsetRecord>& sink,
                          const ParseOptions& opts) {
  std::unordered_set<std::string> seen;
  return drive<HandsetRecord>(
      in, kHandsetHeader, sink, opts, [&](const Fields& f) -> RowResult<HandsetRecord> {
        HandsetRecord h;
        if (f[0].empty()) return std::string("subscriber_id is empty");
        h.subscriber_id = f[0];
        h.manufacturer = f[1];
        h.brand = f[2];
        if (f[3] == "1")
          h.camera_enabled = true;
        else if (f[3] == "0")
          h.camera_enabled = false;
        else
          return "camera_enabled must be 0 or 1, got '" + std::string(f[3]) + "'";
        const auto dc = parse_device_class(f[4]);
        if (!dc) return "bad device_class '" + std::string(f[4]) + "'";
        h.device_class = *dc;
        if (!seen.insert(h.subscriber_id).second)
          throw DataError("duplicate handset record for '" + h.subscriber_id + "'");
        return h;
      });
}

ParseStats parse_labels(std::istream& in, const Sink<LiteracyLabel>& sink,
                        const ParseOptions& opts) {
  std::unordered_set<std::string> seen;
  return drive<LiteracyLabel>(in, kLabelHeader, sink, opts,
                              [&](const Fields& f) -> RowResult<LiteracyLabel> {
                                LiteracyLabel l;
                                if (f[0].empty()) return std::string("subscriber_id is empty");
                                l.subscriber_id = f[0];
                                if (f[1] == "1")
                                  l.literate = true;
                                else if (f[1] == "0")
                                  l.literate = false;
                                else
                                  return "literate must be 0 or 1, got '" + std::string(f[1]) + "'";
                                if (!seen.insert(l.subscriber_id).second)
                                  throw DataError("duplicate label for '" + l.subscriber_id + "'");
                                return l;
                              });
}

namespace {

template <class T, class ParseFn>
Parsed<T> read_file(const std::string& path, const ParseOptions& opts, ParseFn&& parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Parsed<T> out;
  try {
    out.stats = parse(in, [&](T&& r) { out.records.push_back(std::move(r)); }, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  return out;
}

}  // namespace

Parsed<CdrEvent> read_cdr(const std::string& path, const ParseOptions& opts) {
  return read_file<CdrEvent>(path, opts, parse_cdr);
}
Parsed<TopUpEvent> read_topups(const std::string& path, const ParseOptions& opts) {
  return read_file<TopUpEvent>(path, opts, parse_topups);
}
Parsed<Tower> read_towers(const std::string& path, const ParseOptions& opts) {
  return read_file<Tower>(path, opts, parse_towers);
}
Parsed<HandsetRecord> read_handsets(const std::string& path, const ParseOptions& opts) {
  return read_file<HandsetRecord>(path, opts, parse_handsets);
}
Parsed<LiteracyLabel> read_labels(const std::string& path, const ParseOptions& opts) {
  return read_file<LiteracyLabel>(path, opts, parse_labels);
}

void write_row(std::ostream& out, const CdrEvent& e) {
  csv::write_field(out, e.subscriber_id);
  out << ',' << format_utc(e.timestamp) << ',' << to_token(e.direction) << ','
      << to_token(e.channel) << ',';
  if (e.peer_id) csv::write_field(out, *e.peer_id);
  out << ',';
  if (e.duration_s) out << *e.duration_s;
  out << ',';
  if (e.volume_bytes) out << *e.volume_bytes;
  out << ',';
  csv::write_field(out, e.tower_id);
  out << ',' << csv::format_double(e.charge) << '\n';
}

void write_row(std::ostream& out, const TopUpEvent& e) {
  csv::write_field(out, e.subscriber_id);
  out << ',' << format_utc(e.timestamp) << ',' << csv::format_double(e.amount) << '\n';
}

void write_row(std::ostream& out, const Tower& t) {
  csv::write_field(out, t.tower_id);
  out << ',' << csv::format_double(t.longitude) << ',' << csv::format_double(t.latitude) << ',';
  csv::write_field(out, t.district);
  out << '\n';
}

void write_row(std::ostream& out, const HandsetRecord& h) {
  csv::write_field(out, h.subscriber_id);
  out << ',';
  csv::write_field(out, h.manufacturer);
  out << ',';
  csv::write_field(out, h.brand);
  out << ',' << (h.camera_enabled ? '1' : '0') << ',' << to_token(h.device_class) << '\n';
}

void write_row(std::ostream& out, const LiteracyLabel& l) {
  csv::write_field(out, l.subscriber_id);
  out << ',' << (l.literate ? '1' : '0') << '\n';
}

ValidationReport validate_bundle(std::span<const CdrEvent> events,
                                 std::span<const TopUpEvent> topups, std::span<const Tower> towers,
                                 std::span<const HandsetRecord> /*handsets*/,
                                 std::span<const LiteracyLabel> labels,
                                 const ObservationWindow& window) {
  constexpr std::size_t kMaxSamples = 20;
  ValidationReport report;
  std::unordered_set<std::string_view> tower_ids;
  for (const auto& t : towers) tower_ids.insert(t.tower_id);
  std::unordered_set<std::string_view> labeled;
  for (const auto& l : labels) labeled.insert(l.subscriber_id);

  std::set<std::string> missing;
  std::set<std::string> unlabeled;
  std::unordered_set<std::string_view> active;
  auto note_window = [&](const std::string& sub, EpochSeconds ts) {
    if (window.contains(ts)) return;
    ++report.out_of_window_events;
    if (report.out_of_window_samples.size() < kMaxSamples)
      report.out_of_window_samples.push_back(sub + "@" + format_utc(ts));
  };
  for (const auto& e : events) {
    if (!tower_ids.count(e.tower_id)) missing.insert(e.tower_id);
    if (!labeled.count(e.subscriber_id)) unlabeled.insert(e.subscriber_id);
    active.insert(e.subscriber_id);
    note_window(e.subscriber_id, e.timestamp);
  }
  for (const auto& t : topups) note_window(t.subscriber_id, t.timestamp);

  report.missing_towers.assign(missing.begin(), missing.end());
  report.unlabeled_subscribers.assign(unlabeled.begin(), unlabeled.end());
  for (const auto& l : labels)
    if (!active.count(l.subscriber_id)) report.zero_event_subscribers.push_back(l.subscriber_id);
  std::sort(report.zero_event_subscribers.begin(), report.zero_event_subscribers.end());
  return report;
}

}  // namespace litmap::ingest
