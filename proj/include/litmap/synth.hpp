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
// Seeded synthetic population with literacy-conditioned behaviour.
//
// Towers sit in disc-shaped zones; illiterate subscribers are homed
// preferentially in high-weight zones. Per class, each channel is a
// homogeneous Poisson process per day scaled by per-subscriber traits: a
// shared activity level times an independent factor per channel group, both
// lognormal and normalised to a class mean of one. Contacts are drawn from a
// pool with geometric weights, places from a pool of towers around home.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "litmap/config.hpp"
#include "litmap/ingest.hpp"
#include "litmap/timeutil.hpp"

namespace litmap::synth {

struct BehaviorProfile {
  double sms_in_per_day = 1.0;
  double sms_out_per_day = 0.5;
  double voice_out_per_day = 1.5;
  double voice_in_per_day = 1.5;
  double voice_mean_duration_s = 90.0;
  double mms_out_per_day = 0.03;
  double mms_in_per_day = 0.03;
  double video_out_per_day = 0.02;
  double video_in_per_day = 0.02;
  double video_mean_duration_s = 120.0;
  double data_sessions_per_day = 1.0;
  double data_mean_volume_bytes = 2.0e6;
  double vas_out_per_day = 0.05;
  double vas_in_per_day = 0.05;
  double contact_pool_size = 20.0;  // mean pool size; each subscriber draws 1 + Poisson(mean - 1)
  double contact_decay = 0.85;      // weight of contact j is decay^j
  double places_pool_size = 6.0;    // mean, as for contacts
  double home_share = 0.5;          // probability an event happens at the home tower
  double topup_mean_amount = 50.0;
  double topup_mean_gap_days = 5.0;
  std::array<double, 3> device_class_probs{0.3, 0.4, 0.3};  // BASIC, FEATURE, SMART

  void validate(const std::string& label) const;
};

struct PopulationConfig {
  std::size_t n_subscribers = 5000;
  double illiterate_prevalence = 0.068;
  int observation_days = 90;
  EpochSeconds window_start = 1451865600;  // 2016-01-04T00:00:00Z, a Monday
  std::size_t n_towers = 200;
  std::size_t n_zones = 8;
  std::vector<double> zone_illiteracy_weights{5.0, 5.0, 5.0, 0.3, 0.3, 0.3, 0.3, 0.3};
  std::uint64_t seed = 42;
  double activity_sigma = 0.5;  // lognormal spread of the shared activity level
  double trait_sigma = 0.5;     // lognormal spread of each channel-group factor
  double decay_jitter = 0.05;   // sd of the per-subscriber contact decay shift
  double zone_radius = 0.09;    // disc radius, fraction of the map side
  std::size_t district_grid = 2;  // districts form a g x g grid, coarser than zones
  double lon_min = 90.33, lon_max = 90.50, lat_min = 23.68, lat_max = 23.88;
  BehaviorProfile illiterate = default_illiterate();
  BehaviorProfile literate = default_literate();

  static BehaviorProfile default_illiterate();
  static BehaviorProfile default_literate();

  ObservationWindow window() const { return {window_start, observation_days}; }
  std::size_t illiterate_count() const;
  void validate() const;

  /// Applies `key = value` entries over the defaults; unknown keys and empty
  /// values are errors naming the key.
  static PopulationConfig from(const KeyValueConfig& kv);
  /// Every recognised key with its default, in documentation order.
  static std::vector<std::pair<std::string, std::string>> documented_keys();
  nlohmann::json to_json() const;
};

struct Zone {
  double cx = 0.0, cy = 0.0;  // unit-square centre
  double weight = 1.0;
};

/// Per-subscriber multipliers. Channel factors include the shared activity
/// level and average exactly one within each class.
struct Traits {
  double voice = 1.0;
  double sms_in = 1.0;
  double sms_out = 1.0;
  double data = 1.0;
  double volume = 1.0;    // scales the mean bytes per data session
  double other = 1.0;     // MMS, video, VAS
  double contacts = 1.0;  // scales the contact pool mean
  double places = 1.0;    // scales the place pool mean
  double decay = 0.0;     // added to the class contact decay
};

struct Population {
  std::vector<Zone> zones;
  std::vector<ingest::Tower> towers;
  std::vector<std::size_t> tower_zone;
  std::vector<ingest::LiteracyLabel> labels;  // sorted by subscriber id
  std::vector<ingest::HandsetRecord> handsets;
  std::vector<std::size_t> home_tower;  // per subscriber, index into towers
  std::vector<Traits> traits;
};

Population generate_population(const PopulationConfig& config);

/// Events of one subscriber, time-sorted.
struct SubscriberStreams {
  std::vector<ingest::CdrEvent> events;
  std::vector<ingest::TopUpEvent> topups;
};

/// Generates subscriber i's streams from a random stream keyed on (seed, i),
/// so the result does not depend on generation order.
SubscriberStreams generate_subscriber(const Population& pop, const PopulationConfig& config,
                                      std::size_t i);

/// Calls `sink` once per subscriber, in subscriber-id order.
void generate_events(const Population& pop, const PopulationConfig& config,
                     const std::function<void(std::size_t, SubscriberStreams&&)>& sink,
                     unsigned threads = 1);

/// Planted-signal feature names recorded in the manifest.
const std::vector<std::string>& planted_signal_features();

/// Writes cdr.csv, topups.csv, towers.csv, handsets.csv, labels.csv and
/// manifest.json into `dir` (created if needed). Returns the manifest.
nlohmann::json write_dataset(const std::string& dir, const PopulationConfig& config,
                             unsigned threads = 1);

}  // namespace litmap::synth
