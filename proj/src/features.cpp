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

#include "litmap/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "litmap/common.hpp"
#include "litmap/geodesy.hpp"

namespace litmap::features {

using ingest::Channel;
using ingest::Direction;

std::string_view to_token(Family f) {
  switch (f) {
    case Family::kFinancial: return "FINANCIAL";
    case Family::kMobility: return "MOBILITY";
    case Family::kSocial: return "SOCIAL";
  }
  return "?";
}

std::string_view to_token(Kind k) { return k == Kind::kNumeric ? "NUMERIC" : "CATEGORICAL"; }

std::optional<Family> parse_family(std::string_view s) {
  for (auto f : {Family::kFinancial, Family::kMobility, Family::kSocial})
    if (s == to_token(f)) return f;
  return std::nullopt;
}

std::optional<Kind> parse_kind(std::string_view s) {
  if (s == "NUMERIC") return Kind::kNumeric;
  if (s == "CATEGORICAL") return Kind::kCategorical;
  return std::nullopt;
}

FeatureCatalog::FeatureCatalog(std::string version, std::vector<FeatureSpec> entries)
    : version_(std::move(version)), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!index_.emplace(entries_[i].name, i).second)
      throw InvariantError("duplicate catalog feature " + entries_[i].name);
}

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const FeatureCatalog& FeatureCatalog::default_catalog() {
  static const FeatureCatalog catalog = [] {
    std::vector<FeatureSpec> v;
    auto add = [&](Family f, std::initializer_list<const char*> names, Kind k = Kind::kNumeric) {
      for (const char* n : names) v.push_back({n, f, k});
    };
    add(Family::kFinancial,
        {"recharge_count", "recharge_amount_mean", "recharge_amount_median",
         "recharge_amount_var", "recharge_amount_std", "recharge_amount_cov",
         "recharge_amount_min", "recharge_amount_max", "recharge_fraction_lowest",
         "recharge_fraction_highest", "spending_speed", "recharge_gap_mean_days",
         "recharge_weekly_total_mean", "recharge_weekly_total_median",
         "recharge_weekly_total_var", "recharge_monthly_total_mean",
         "recharge_monthly_total_median", "recharge_monthly_total_var", "charge_voice_out",
         "charge_voice_in", "charge_sms_out", "charge_sms_in", "charge_mms_out", "charge_mms_in",
         "charge_video_out", "charge_video_in", "charge_data_out", "charge_data_in",
         "charge_vas_out", "charge_vas_in", "charge_roaming", "charge_total"});
    add(Family::kFinancial,
        {"handset_manufacturer", "handset_brand", "handset_camera", "handset_device_class"},
        Kind::kCategorical);
    add(Family::kMobility, {"home_tower"}, Kind::kCategorical);
    add(Family::kMobility, {"home_longitude", "home_latitude"});
    add(Family::kMobility, {"home_district"}, Kind::kCategorical);
    add(Family::kMobility,
        {"places_visited", "places_entropy", "radius_of_gyration_km"});
    add(Family::kSocial,
        {"degree", "degree_in", "degree_out", "interactions_per_contact", "contacts_entropy",
         "top_contact_share", "voice_out_count", "voice_in_count", "voice_out_duration",
         "voice_in_duration", "sms_out_count", "sms_in_count", "mms_out_count", "mms_in_count",
         "video_out_count", "video_in_count", "video_out_duration", "video_in_duration",
         "data_count", "data_volume", "vas_out_count", "vas_in_count", "sms_in_weekly_mean",
         "sms_in_weekly_median", "sms_in_weekly_var", "sms_out_weekly_mean",
         "sms_out_weekly_median", "sms_out_weekly_var", "data_volume_weekly_mean",
         "data_volume_weekly_median", "data_volume_weekly_var", "event_count", "active_days"});
    return FeatureCatalog("cdr-features-v1", std::move(v));
  }();
  return catalog;
}

std::optional<double> PartialFeatures::get(std::string_view name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return v;
  return std::nullopt;
}

bool PartialFeatures::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

double CategoryEncoder::encode(const std::string& value) {
  const auto next = static_cast<double>(codes_.size());
  return codes_.emplace(value, next).first->second;
}

std::optional<double> CategoryEncoder::lookup(const std::string& value) const {
  const auto it = codes_.find(value);
  if (it == codes_.end()) return std::nullopt;
  return it->second;
}

HandsetEncoding HandsetEncoding::from(std::span<const ingest::HandsetRecord> handsets) {
  HandsetEncoding enc;
  for (const auto& h : handsets) {
    enc.manufacturer.encode(h.manufacturer);
    enc.brand.encode(h.brand);
  }
  return enc;
}

TowerIndex::TowerIndex(std::span<const ingest::Tower> towers) {
  CategoryEncoder districts;
  double code = 0.0;
  for (const auto& t : towers) {
    entries_.emplace(t.tower_id,
                     Entry{t.longitude, t.latitude, code, districts.encode(t.district)});
    code += 1.0;
  }
}

const TowerIndex::Entry* TowerIndex::find(std::string_view tower_id) const {
  const auto it = entries_.find(std::string(tower_id));
  return it == entries_.end() ? nullptr : &it->second;
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double variance(std::span<const double> x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

double shannon_entropy(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h > 0.0 ? h : 0.0;
}

std::optional<std::size_t> Buckets::bucket_of(EpochSeconds t) const {
  if (count == 0 || t < first) return std::nullopt;
  const auto k = static_cast<std::size_t>((t - first) / length);
  if (k >= count) return std::nullopt;
  return k;
}

Buckets iso_weeks(const ObservationWindow& w) {
  constexpr EpochSeconds kWeek = 7 * kSecondsPerDay;
  auto day = epoch_day(w.start);
  if (day * kSecondsPerDay < w.start) ++day;
  const int wd = weekday(day * kSecondsPerDay);
  const EpochSeconds first = (day + (7 - wd) % 7) * kSecondsPerDay;
  Buckets b{first, kWeek, 0};
  if (w.end() > first) b.count = static_cast<std::size_t>((w.end() - first) / kWeek);
  return b;
}

Buckets month_blocks(const ObservationWindow& w) {
  return Buckets{w.start, 30 * kSecondsPerDay, static_cast<std::size_t>(std::max(0, w.days / 30))};
}

namespace {

void put_stats(PartialFeatures& out, const std::string& prefix, const std::vector<double>& xs) {
  if (xs.empty()) {
    out.mask(prefix + "_mean");
    out.mask(prefix + "_median");
    out.mask(prefix + "_var");
    return;
  }
  out.set(prefix + "_mean", mean(xs));
  out.set(prefix + "_median", median(xs));
  out.set(prefix + "_var", variance(xs));
}

std::string channel_key(Channel c) {
  switch (c) {
    case Channel::kVoice: return "voice";
    case Channel::kSms: return "sms";
    case Channel::kMms: return "mms";
    case Channel::kVideo: return "video";
    case Channel::kData: return "data";
    case Channel::kVas: return "vas";
  }
  return "?";
}

}  // namespace

PartialFeatures financial_features(std::span<const ingest::TopUpEvent> topups,
                                   std::span<const ingest::CdrEvent> events,
                                   const ingest::HandsetRecord* handset,
                                   const HandsetEncoding& encoding,
                                   const ObservationWindow& window) {
  PartialFeatures out;
  static const char* kRecharge[] = {
      "recharge_count", "recharge_amount_mean", "recharge_amount_median", "recharge_amount_var",
      "recharge_amount_std", "recharge_amount_cov", "recharge_amount_min", "recharge_amount_max",
      "recharge_fraction_lowest", "recharge_fraction_highest", "spending_speed",
      "recharge_gap_mean_days", "recharge_weekly_total_mean", "recharge_weekly_total_median",
      "recharge_weekly_total_var", "recharge_monthly_total_mean", "recharge_monthly_total_median",
      "recharge_monthly_total_var"};

  if (topups.empty()) {
    for (const char* n : kRecharge) out.mask(n);
  } else {
    std::vector<double> amounts;
    amounts.reserve(topups.size());
    for (const auto& t : topups) amounts.push_back(t.amount);
    const double n = static_cast<double>(amounts.size());
    const double m = mean(amounts);
    const double var = variance(amounts);
    const double sd = std::sqrt(var);
    const auto [lo_it, hi_it] = std::minmax_element(amounts.begin(), amounts.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double total = std::accumulate(amounts.begin(), amounts.end(), 0.0);
    out.set("recharge_count", n);
    out.set("recharge_amount_mean", m);
    out.set("recharge_amount_median", median(amounts));
    out.set("recharge_amount_var", var);
    out.set("recharge_amount_std", sd);
    if (m > 0.0)
      out.set("recharge_amount_cov", sd / m);
    else
      out.mask("recharge_amount_cov");
    out.set("recharge_amount_min", lo);
    out.set("recharge_amount_max", hi);
    out.set("recharge_fraction_lowest",
            static_cast<double>(std::count(amounts.begin(), amounts.end(), lo)) / n);
    out.set("recharge_fraction_highest",
            static_cast<double>(std::count(amounts.begin(), amounts.end(), hi)) / n);
    out.set("spending_speed", total / static_cast<double>(window.days));

    if (topups.size() >= 2) {
      std::vector<EpochSeconds> ts;
      for (const auto& t : topups) ts.push_back(t.timestamp);
      std::sort(ts.begin(), ts.end());
      const double span_days =
          static_cast<double>(ts.back() - ts.front()) / static_cast<double>(kSecondsPerDay);
      out.set("recharge_gap_mean_days", span_days / static_cast<double>(ts.size() - 1));
    } else {
      out.mask("recharge_gap_mean_days");
    }

    for (const auto& [prefix, buckets] :
         {std::pair{std::string("recharge_weekly_total"), iso_weeks(window)},
          std::pair{std::string("recharge_monthly_total"), month_blocks(window)}}) {
      std::vector<double> totals(buckets.count, 0.0);
      for (const auto& t : topups)
        if (const auto k = buckets.bucket_of(t.timestamp)) totals[*k] += t.amount;
      put_stats(out, prefix, totals);
    }
  }

  double charges[ingest::kChannelCount][2] = {};
  double charge_total = 0.0;
  for (const auto& e : events) {
    charges[static_cast<int>(e.channel)][e.direction == Direction::kOut ? 0 : 1] += e.charge;
    charge_total += e.charge;
  }
  for (int c = 0; c < ingest::kChannelCount; ++c) {
    const auto key = "charge_" + channel_key(static_cast<Channel>(c));
    out.set(key + "_out", charges[c][0]);
    out.set(key + "_in", charges[c][1]);
  }
  // The CDR schema carries no roaming flag.
  out.mask("charge_roaming");
  out.set("charge_total", charge_total);

  if (handset) {
    out.set_or_mask("handset_manufacturer", encoding.manufacturer.lookup(handset->manufacturer));
    out.set_or_mask("handset_brand", encoding.brand.lookup(handset->brand));
    out.set("handset_camera", handset->camera_enabled ? 1.0 : 0.0);
    out.set("handset_device_class", static_cast<double>(handset->device_class));
  } else {
    for (const char* n :
         {"handset_manufacturer", "handset_brand", "handset_camera", "handset_device_class"})
      out.mask(n);
  }
  return out;
}

std::optional<std::string> home_tower(std::span<const ingest::CdrEvent> events) {
  std::map<std::string_view, std::size_t> visits;
  for (const auto& e : events) ++visits[e.tower_id];
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& [id, n] : visits) {
    if (n > best_count) {
      best_count = n;
      best = std::string(id);
    }
  }
  return best;
}

PartialFeatures mobility_features(std::span<const ingest::CdrEvent> events,
                                  const TowerIndex& towers, const ObservationWindow& /*window*/) {
  PartialFeatures out;
  if (events.empty()) {
    for (const char* n : {"home_tower", "home_longitude", "home_latitude", "home_district",
                          "places_visited", "places_entropy", "radius_of_gyration_km"})
      out.mask(n);
    return out;
  }

  std::map<std::string_view, std::size_t> visits;
  for (const auto& e : events) ++visits[e.tower_id];

  std::vector<geo::LonLat> points;
  std::vector<double> counts;
  std::size_t home_count = 0;
  const TowerIndex::Entry* home_entry = nullptr;
  for (const auto& [id, n] : visits) {
    const auto* t = towers.find(id);
    if (!t) throw DataError("event references unknown tower '" + std::string(id) + "'");
    points.push_back({t->longitude, t->latitude});
    counts.push_back(static_cast<double>(n));
    if (n > home_count) {
      home_count = n;
      home_entry = t;
    }
  }
  const double total = static_cast<double>(events.size());

  out.set("home_tower", home_entry->tower_code);
  out.set("home_longitude", home_entry->longitude);
  out.set("home_latitude", home_entry->latitude);
  out.set("home_district", home_entry->district_code);
  out.set("places_visited", static_cast<double>(visits.size()));
  out.set("places_entropy", shannon_entropy(counts));

  const bool single_location = std::all_of(points.begin(), points.end(), [&](const auto& p) {
    return p.lon == points.front().lon && p.lat == points.front().lat;
  });
  double rg = 0.0;
  if (!single_location) {
    const auto centroid = geo::spherical_centroid(points, counts);
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = geo::haversine_km(points[i], centroid);
      acc += counts[i] * d * d;
    }
    rg = std::sqrt(acc / total);
  }
  out.set("radius_of_gyration_km", rg);
  return out;
}

PartialFeatures social_features(std::span<const ingest::CdrEvent> events,
                                const ObservationWindow& window) {
  PartialFeatures out;
  std::map<std::string_view, std::size_t> peers;
  std::set<std::string_view> peers_in;
  std::set<std::string_view> peers_out;
  double count[ingest::kChannelCount][2] = {};
  double duration[ingest::kChannelCount][2] = {};
  double volume = 0.0;
  std::set<std::int64_t> days;

  const auto weeks = iso_weeks(window);
  std::vector<double> sms_in_w(weeks.count, 0.0);
  std::vector<double> sms_out_w(weeks.count, 0.0);
  std::vector<double> vol_w(weeks.count, 0.0);

  for (const auto& e : events) {
    const int c = static_cast<int>(e.channel);
    const int d = e.direction == Direction::kOut ? 0 : 1;
    count[c][d] += 1.0;
    if (e.duration_s) duration[c][d] += static_cast<double>(*e.duration_s);
    if (e.volume_bytes) volume += static_cast<double>(*e.volume_bytes);
    if (e.peer_id) {
      ++peers[*e.peer_id];
      (d == 0 ? peers_out : peers_in).insert(*e.peer_id);
    }
    days.insert(epoch_day(e.timestamp));
    if (const auto k = weeks.bucket_of(e.timestamp)) {
      if (e.channel == Channel::kSms) (d == 0 ? sms_out_w : sms_in_w)[*k] += 1.0;
      if (e.volume_bytes) vol_w[*k] += static_cast<double>(*e.volume_bytes);
    }
  }

  const double degree = static_cast<double>(peers.size());
  out.set("degree", degree);
  out.set("degree_in", static_cast<double>(peers_in.size()));
  out.set("degree_out", static_cast<double>(peers_out.size()));
  if (peers.empty()) {
    out.mask("interactions_per_contact");
    out.mask("contacts_entropy");
    out.mask("top_contact_share");
  } else {
    std::vector<double> counts;
    double total = 0.0;
    double top = 0.0;
    for (const auto& [id, n] : peers) {
      counts.push_back(static_cast<double>(n));
      total += static_cast<double>(n);
      top = std::max(top, static_cast<double>(n));
    }
    out.set("interactions_per_contact", total / degree);
    out.set("contacts_entropy", peers.size() == 1 ? 0.0 : shannon_entropy(counts));
    out.set("top_contact_share", top / total);
  }

  auto cnt = [&](Channel c, int d) { return count[static_cast<int>(c)][d]; };
  auto dur = [&](Channel c, int d) { return duration[static_cast<int>(c)][d]; };
  out.set("voice_out_count", cnt(Channel::kVoice, 0));
  out.set("voice_in_count", cnt(Channel::kVoice, 1));
  out.set("voice_out_duration", dur(Channel::kVoice, 0));
  out.set("voice_in_duration", dur(Channel::kVoice, 1));
  out.set("sms_out_count", cnt(Channel::kSms, 0));
  out.set("sms_in_count", cnt(Channel::kSms, 1));
  out.set("mms_out_count", cnt(Channel::kMms, 0));
  out.set("mms_in_count", cnt(Channel::kMms, 1));
  out.set("video_out_count", cnt(Channel::kVideo, 0));
  out.set("video_in_count", cnt(Channel::kVideo, 1));
  out.set("video_out_duration", dur(Channel::kVideo, 0));
  out.set("video_in_duration", dur(Channel::kVideo, 1));
  out.set("data_count", cnt(Channel::kData, 0) + cnt(Channel::kData, 1));
  out.set("data_volume", volume);
  out.set("vas_out_count", cnt(Channel::kVas, 0));
  out.set("vas_in_count", cnt(Channel::kVas, 1));
  put_stats(out, "sms_in_weekly", sms_in_w);
  put_stats(out, "sms_out_weekly", sms_out_w);
  put_stats(out, "data_volume_weekly", vol_w);
  out.set("event_count", static_cast<double>(events.size()));
  out.set("active_days", static_cast<double>(days.size()));
  return out;
}

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

void FeatureMatrix::append_column(FeatureSpec spec, std::span<const double> column) {
  if (column.size() != rows()) throw InvariantError("append_column: row count mismatch");
  const std::size_t old_cols = cols();
  std::vector<double> v;
  std::vector<std::uint8_t> m;
  v.reserve(rows() * (old_cols + 1));
  m.reserve(rows() * (old_cols + 1));
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < old_cols; ++c) {
      v.push_back(values[r * old_cols + c]);
      m.push_back(missing[r * old_cols + c]);
    }
    v.push_back(column[r]);
    m.push_back(std::isnan(column[r]) ? 1 : 0);
  }
  values = std::move(v);
  missing = std::move(m);
  columns.push_back(std::move(spec));
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.catalog_version = catalog_version;
  out.ids = ids;
  for (auto c : indices) out.columns.push_back(columns.at(c));
  out.values.reserve(rows() * indices.size());
  out.missing.reserve(rows() * indices.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (auto c : indices) {
      out.values.push_back(at(r, c));
      out.missing.push_back(missing[r * cols() + c]);
    }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.catalog_version = catalog_version;
  out.columns = columns;
  for (auto r : indices) {
    out.ids.push_back(ids.at(r));
    out.values.insert(out.values.end(), values.begin() + r * cols(),
                      values.begin() + (r + 1) * cols());
    out.missing.insert(out.missing.end(), missing.begin() + r * cols(),
                       missing.begin() + (r + 1) * cols());
  }
  return out;
}

FeatureMatrix assemble_matrix(std::vector<SubscriberPartials> subscribers,
                              const FeatureCatalog& catalog) {
  std::sort(subscribers.begin(), subscribers.end(),
            [](const auto& a, const auto& b) { return a.subscriber_id < b.subscriber_id; });
  for (std::size_t i = 1; i < subscribers.size(); ++i)
    if (subscribers[i].subscriber_id == subscribers[i - 1].subscriber_id)
      throw DataError("duplicate subscriber in partials: " + subscribers[i].subscriber_id);

  FeatureMatrix m;
  m.catalog_version = catalog.version();
  m.columns.assign(catalog.entries().begin(), catalog.entries().end());
  const std::size_t cols = catalog.size();
  m.values.assign(subscribers.size() * cols, kMissing);
  m.missing.assign(subscribers.size() * cols, 1);
  for (std::size_t r = 0; r < subscribers.size(); ++r) {
    m.ids.push_back(subscribers[r].subscriber_id);
    for (const auto& partial : subscribers[r].partials) {
      for (const auto& [name, value] : partial.entries()) {
        const auto c = catalog.index_of(name);
        if (!c) throw DataError("feature '" + name + "' is not in catalog " + catalog.version());
        if (value && std::isfinite(*value)) {
          m.values[r * cols + *c] = *value;
          m.missing[r * cols + *c] = 0;
        } else if (value) {
          throw InvariantError("non-finite value for feature '" + name + "'");
        }
      }
    }
  }
  return m;
}

FeaturizeResult featurize(const Bundle& bundle, const ObservationWindow& window,
                          unsigned threads) {
  const auto encoding = HandsetEncoding::from(bundle.handsets);
  const TowerIndex towers(bundle.towers);

  std::unordered_map<std::string_view, std::vector<std::size_t>> events_of;
  for (std::size_t i = 0; i < bundle.events.size(); ++i)
    if (window.contains(bundle.events[i].timestamp))
      events_of[bundle.events[i].subscriber_id].push_back(i);
  std::unordered_map<std::string_view, std::vector<std::size_t>> topups_of;
  for (std::size_t i = 0; i < bundle.topups.size(); ++i)
    if (window.contains(bundle.topups[i].timestamp))
      topups_of[bundle.topups[i].subscriber_id].push_back(i);
  std::unordered_map<std::string_view, const ingest::HandsetRecord*> handset_of;
  for (const auto& h : bundle.handsets) handset_of[h.subscriber_id] = &h;

  std::vector<std::string> ids;
  for (const auto& l : bundle.labels) ids.push_back(l.subscriber_id);
  std::sort(ids.begin(), ids.end());

  std::vector<SubscriberPartials> partials(ids.size());
  std::vector<std::optional<std::string>> homes(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    const auto& id = ids[i];
    std::vector<ingest::CdrEvent> events;
    if (auto it = events_of.find(id); it != events_of.end())
      for (auto k : it->second) events.push_back(bundle.events[k]);
    std::vector<ingest::TopUpEvent> topups;
    if (auto it = topups_of.find(id); it != topups_of.end())
      for (auto k : it->second) topups.push_back(bundle.topups[k]);
    const auto h = handset_of.find(id);
    const ingest::HandsetRecord* handset = h == handset_of.end() ? nullptr : h->second;

    partials[i].subscriber_id = id;
    partials[i].partials.push_back(financial_features(topups, events, handset, encoding, window));
    partials[i].partials.push_back(mobility_features(events, towers, window));
    partials[i].partials.push_back(social_features(events, window));
    homes[i] = home_tower(events);
  });

  FeaturizeResult result;
  result.matrix = assemble_matrix(std::move(partials), FeatureCatalog::default_catalog());
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (homes[i]) result.home_towers.emplace(ids[i], *homes[i]);
  return result;
}

}  // namespace litmap::features
