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
// Per-subscriber behavioral features over an observation window.
//
// Three families: financial (recharges, charges, handset), mobility (home
// tower, places, gyration) and social (contacts, per-channel usage). Missing
// values are NaN in the value array *and* flagged in the mask; a masked entry
// is never a silent zero.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litmap/ingest.hpp"
#include "litmap/timeutil.hpp"

namespace litmap::features {

enum class Family : std::uint8_t { kFinancial, kMobility, kSocial };
enum class Kind : std::uint8_t { kNumeric, kCategorical };

std::string_view to_token(Family f);
std::string_view to_token(Kind k);
std::optional<Family> parse_family(std::string_view s);
std::optional<Kind> parse_kind(std::string_view s);

struct FeatureSpec {
  std::string name;
  Family family = Family::kSocial;
  Kind kind = Kind::kNumeric;

  bool operator==(const FeatureSpec&) const = default;
};

class FeatureCatalog {
 public:
  FeatureCatalog(std::string version, std::vector<FeatureSpec> entries);

  static const FeatureCatalog& default_catalog();

  const std::string& version() const { return version_; }
  std::size_t size() const { return entries_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const FeatureSpec> entries() const { return entries_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  std::string version_;
  std::vector<FeatureSpec> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Named values produced by one family extractor; nullopt = masked.
class PartialFeatures {
 public:
  void set(std::string_view name, double value) { entries_.emplace_back(name, value); }
  void mask(std::string_view name) { entries_.emplace_back(name, std::nullopt); }
  void set_or_mask(std::string_view name, std::optional<double> v) { entries_.emplace_back(name, v); }

  const std::vector<std::pair<std::string, std::optional<double>>>& entries() const {
    return entries_;
  }
  std::optional<double> get(std::string_view name) const;
  bool contains(std::string_view name) const;

 private:
  std::vector<std::pair<std::string, std::optional<double>>> entries_;
};

/// Integer codes for categorical handset fields, by first appearance in the handset file.
class CategoryEncoder {
 public:
  double encode(const std::string& value);
  std::optional<double> lookup(const std::string& value) const;
  std::size_t size() const { return codes_.size(); }

 private:
  std::unordered_map<std::string, double> codes_;
};

struct HandsetEncoding {
  CategoryEncoder manufacturer;
  CategoryEncoder brand;

  static HandsetEncoding from(std::span<const ingest::HandsetRecord> handsets);
};

/// Tower lookup with categorical codes for tower and district (tower-file order).
class TowerIndex {
 public:
  explicit TowerIndex(std::span<const ingest::Tower> towers);

  struct Entry {
    double longitude;
    double latitude;
    double tower_code;
    double district_code;
  };
  const Entry* find(std::string_view tower_id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

// Descriptive statistics; variance is the population variance (divide by n).
double mean(std::span<const double> x);
double median(std::span<const double> x);
double variance(std::span<const double> x);
/// Shannon entropy in nats of a count vector (zero counts ignored).
double shannon_entropy(std::span<const double> counts);

/// Bucket boundaries for weekly (complete ISO weeks) and monthly (complete
/// 30-day blocks) aggregates. Buckets are half-open [start, start + length).
struct Buckets {
  EpochSeconds first = 0;
  EpochSeconds length = 0;
  std::size_t count = 0;

  std::optional<std::size_t> bucket_of(EpochSeconds t) const;
};
Buckets iso_weeks(const ObservationWindow& w);
Buckets month_blocks(const ObservationWindow& w);

PartialFeatures financial_features(std::span<const ingest::TopUpEvent> topups,
                                   std::span<const ingest::CdrEvent> events,
                                   const ingest::HandsetRecord* handset,
                                   const HandsetEncoding& encoding,
                                   const ObservationWindow& window);

PartialFeatures mobility_features(std::span<const ingest::CdrEvent> events, const TowerIndex& towers,
                                  const ObservationWindow& window);

PartialFeatures social_features(std::span<const ingest::CdrEvent> events,
                                const ObservationWindow& window);

/// Modal tower over all events; ties go to the lexicographically smallest id.
std::optional<std::string> home_tower(std::span<const ingest::CdrEvent> events);

/// Dense subscriber x feature matrix, rows sorted by subscriber id.
struct FeatureMatrix {
  std::string catalog_version;
  std::vector<FeatureSpec> columns;
  std::vector<std::string> ids;
  std::vector<double> values;         // row-major; NaN where masked
  std::vector<std::uint8_t> missing;  // row-major mask

  std::size_t rows() const { return ids.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols() + c] != 0; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
  std::optional<std::size_t> column_index(std::string_view name) const;

  /// Appends a column; `column` must have rows() entries (NaN = missing).
  void append_column(FeatureSpec spec, std::span<const double> column);
  FeatureMatrix select_columns(std::span<const std::size_t> indices) const;
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
};

struct SubscriberPartials {
  std::string subscriber_id;
  std::vector<PartialFeatures> partials;
};

/// Throws DataError when a partial names a feature outside the catalog.
/// Features not produced by any partial are masked.
FeatureMatrix assemble_matrix(std::vector<SubscriberPartials> subscribers,
                              const FeatureCatalog& catalog);

struct Bundle {
  std::vector<ingest::CdrEvent> events;
  std::vector<ingest::TopUpEvent> topups;
  std::vector<ingest::Tower> towers;
  std::vector<ingest::HandsetRecord> handsets;
  std::vector<ingest::LiteracyLabel> labels;
};

struct FeaturizeResult {
  FeatureMatrix matrix;
  std::map<std::string, std::string> home_towers;  // subscriber -> modal tower
};

/// Featurizes every labeled subscriber. Events outside the window are ignored.
FeaturizeResult featurize(const Bundle& bundle, const ObservationWindow& window,
                          unsigned threads = 1);

}  // namespace litmap::features
