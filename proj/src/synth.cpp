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

#include "litmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"
#include "litmap/features.hpp"
#include "litmap/geodesy.hpp"

namespace litmap::synth {

using ingest::Channel;
using ingest::DeviceClass;
using ingest::Direction;

namespace {

constexpr std::int64_t kDay = 86400;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double cents(double v) { return std::round(v * 100.0) / 100.0; }
double micro(double v) { return std::round(v * 1e6) / 1e6; }

std::string numbered(const char* prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  return static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(rng));
}

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double exponential(std::mt19937_64& rng, double mean) {
  return std::exponential_distribution<double>(1.0 / mean)(rng);
}

/// Index drawn from cumulative weights (last entry is the total).
std::size_t pick(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

std::vector<double> cumulate(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

struct ProfileField {
  const char* key;
  double BehaviorProfile::*member;
  bool allow_zero;
};

const std::vector<ProfileField>& profile_fields() {
  static const std::vector<ProfileField> fields = {
      {"sms_in_per_day", &BehaviorProfile::sms_in_per_day, true},
      {"sms_out_per_day", &BehaviorProfile::sms_out_per_day, true},
      {"voice_out_per_day", &BehaviorProfile::voice_out_per_day, true},
      {"voice_in_per_day", &BehaviorProfile::voice_in_per_day, true},
      {"voice_mean_duration_s", &BehaviorProfile::voice_mean_duration_s, false},
      {"mms_out_per_day", &BehaviorProfile::mms_out_per_day, true},
      {"mms_in_per_day", &BehaviorProfile::mms_in_per_day, true},
      {"video_out_per_day", &BehaviorProfile::video_out_per_day, true},
      {"video_in_per_day", &BehaviorProfile::video_in_per_day, true},
      {"video_mean_duration_s", &BehaviorProfile::video_mean_duration_s, false},
      {"data_sessions_per_day", &BehaviorProfile::data_sessions_per_day, true},
      {"data_mean_volume_bytes", &BehaviorProfile::data_mean_volume_bytes, false},
      {"vas_out_per_day", &BehaviorProfile::vas_out_per_day, true},
      {"vas_in_per_day", &BehaviorProfile::vas_in_per_day, true},
      {"contact_pool_size", &BehaviorProfile::contact_pool_size, false},
      {"contact_decay", &BehaviorProfile::contact_decay, false},
      {"places_pool_size", &BehaviorProfile::places_pool_size, false},
      {"home_share", &BehaviorProfile::home_share, false},
      {"topup_mean_amount", &BehaviorProfile::topup_mean_amount, false},
      {"topup_mean_gap_days", &BehaviorProfile::topup_mean_gap_days, false},
  };
  return fields;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(v[i]);
  }
  return out;
}

std::vector<double> default_zone_weights(std::size_t n_zones) {
  std::vector<double> w(n_zones, 0.3);
  for (std::size_t z = 0; z < std::min<std::size_t>(3, n_zones); ++z) w[z] = 5.0;
  return w;
}

nlohmann::json profile_json(const BehaviorProfile& p) {
  nlohmann::json j;
  for (const auto& f : profile_fields()) j[f.key] = p.*(f.member);
  j["device_class_probs"] = {{"BASIC", p.device_class_probs[0]},
                             {"FEATURE", p.device_class_probs[1]},
                             {"SMART", p.device_class_probs[2]}};
  return j;
}

struct HandsetModel {
  const char* manufacturer;
  const char* brand;
};

const std::vector<HandsetModel>& models_for(DeviceClass c) {
  static const std::vector<HandsetModel> basic = {
      {"Nokia", "Nokia 105"}, {"Symphony", "Symphony B12"}, {"Walton", "Walton Olvio L2"}};
  static const std::vector<HandsetModel> feature = {
      {"Nokia", "Nokia 3310"}, {"Samsung", "Samsung Guru"}, {"Symphony", "Symphony D54"}};
  static const std::vector<HandsetModel> smart = {{"Samsung", "Samsung Galaxy J2"},
                                                  {"Huawei", "Huawei Y6"},
                                                  {"Xiaomi", "Xiaomi Redmi 4A"},
                                                  {"Symphony", "Symphony i10"}};
  switch (c) {
    case DeviceClass::kBasic:
      return basic;
    case DeviceClass::kFeature:
      return feature;
    case DeviceClass::kSmart:
      break;
  }
  return smart;
}

constexpr std::array<double, 10> kDenominations = {10, 20, 30, 50, 100, 150, 200, 300, 500, 1000};

double snap_denomination(double x) {
  double best = kDenominations[0];
  for (double d : kDenominations)
    if (std::abs(std::log(d / x)) < std::abs(std::log(best / x))) best = d;
  return best;
}

double charge_for(Channel c, Direction d, std::int64_t duration, std::int64_t volume) {
  // Data is sold as session passes, so its charge does not track volume.
  if (c == Channel::kData) return volume > 0 ? 1.0 : 0.0;
  if (d == Direction::kIn) return 0.0;
  const double minutes = std::ceil(static_cast<double>(duration) / 60.0);
  switch (c) {
    case Channel::kVoice:
      return cents(minutes * 0.5);
    case Channel::kSms:
      return 0.5;
    case Channel::kMms:
      return 2.0;
    case Channel::kVideo:
      return cents(minutes * 1.5);
    case Channel::kVas:
      return 2.0;
    case Channel::kData:
      break;
  }
  return 0.0;
}

}  // namespace

void BehaviorProfile::validate(const std::string& label) const {
  for (const auto& f : profile_fields()) {
    const double v = this->*(f.member);
    const std::string name = label + "." + f.key;
    require(std::isfinite(v), name + " must be finite");
    if (f.allow_zero)
      require(v >= 0.0, name + " must be non-negative");
    else
      require(v > 0.0, name + " must be positive");
  }
  require(contact_pool_size >= 1.0, label + ".contact_pool_size must be at least 1");
  require(places_pool_size >= 1.0, label + ".places_pool_size must be at least 1");
  require(contact_decay <= 1.0, label + ".contact_decay must be in (0, 1]");
  require(home_share <= 1.0, label + ".home_share must be in (0, 1]");
  double total = 0.0;
  for (double p : device_class_probs) {
    require(std::isfinite(p) && p >= 0.0, label + ".device_class_probs must be non-negative");
    total += p;
  }
  require(total > 0.0, label + ".device_class_probs must not all be zero");
}

BehaviorProfile PopulationConfig::default_illiterate() {
  // Class differences live only in rates and pool sizes, which the
  // per-subscriber traits blur; per-event quantities match the literate class.
  BehaviorProfile p = default_literate();
  p.sms_in_per_day = 0.5;
  p.data_mean_volume_bytes = 1.0e6;
  p.contact_pool_size = 9.0;
  p.contact_decay = 0.78;
  p.places_pool_size = 3.5;
  p.device_class_probs = {0.3, 0.35, 0.35};
  return p;
}

BehaviorProfile PopulationConfig::default_literate() {
  BehaviorProfile p;
  p.sms_in_per_day = 1.0;
  p.sms_out_per_day = 0.45;
  p.voice_out_per_day = 1.6;
  p.voice_in_per_day = 1.6;
  p.voice_mean_duration_s = 90.0;
  p.mms_out_per_day = 0.03;
  p.mms_in_per_day = 0.03;
  p.video_out_per_day = 0.02;
  p.video_in_per_day = 0.02;
  p.video_mean_duration_s = 120.0;
  p.data_sessions_per_day = 1.0;
  p.data_mean_volume_bytes = 2.0e6;
  p.vas_out_per_day = 0.05;
  p.vas_in_per_day = 0.05;
  p.contact_pool_size = 15.0;
  p.contact_decay = 0.85;
  p.places_pool_size = 6.0;
  p.home_share = 0.5;
  p.topup_mean_amount = 50.0;
  p.topup_mean_gap_days = 5.0;
  p.device_class_probs = {0.25, 0.35, 0.4};
  return p;
}

std::size_t PopulationConfig::illiterate_count() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_subscribers) * illiterate_prevalence));
}

void PopulationConfig::validate() const {
  require(n_subscribers > 0, "n_subscribers must be positive");
  require(illiterate_prevalence > 0.0 && illiterate_prevalence < 1.0,
          "illiterate_prevalence must be in (0, 1)");
  require(observation_days > 0, "observation_days must be positive");
  require(n_towers > 0, "n_towers must be positive");
  require(n_zones > 0, "n_zones must be positive");
  require(n_zones <= n_towers, "n_zones must not exceed n_towers");
  require(zone_illiteracy_weights.size() == n_zones,
          "zone_illiteracy_weights has " + std::to_string(zone_illiteracy_weights.size()) +
              " entries but n_zones is " + std::to_string(n_zones));
  double total = 0.0;
  for (double w : zone_illiteracy_weights) {
    require(std::isfinite(w) && w >= 0.0, "zone_illiteracy_weights must be non-negative");
    total += w;
  }
  require(total > 0.0, "zone_illiteracy_weights must not all be zero");
  require(activity_sigma >= 0.0 && std::isfinite(activity_sigma),
          "activity_sigma must be non-negative");
  require(trait_sigma >= 0.0 && std::isfinite(trait_sigma), "trait_sigma must be non-negative");
  require(decay_jitter >= 0.0 && std::isfinite(decay_jitter), "decay_jitter must be non-negative");
  require(zone_radius > 0.0 && zone_radius < 0.5, "zone_radius must be in (0, 0.5)");
  require(district_grid >= 1 && district_grid <= 9, "district_grid must be in [1, 9]");
  require(lon_min < lon_max && lat_min < lat_max, "bounding box is empty");
  require(lon_min >= -180.0 && lon_max <= 180.0 && lat_min >= -90.0 && lat_max <= 90.0,
          "bounding box outside valid coordinates");
  illiterate.validate("illiterate");
  literate.validate("literate");
}

std::vector<std::pair<std::string, std::string>> PopulationConfig::documented_keys() {
  const PopulationConfig d;
  std::vector<std::pair<std::string, std::string>> keys = {
      {"n_subscribers", std::to_string(d.n_subscribers)},
      {"illiterate_prevalence", csv::format_double(d.illiterate_prevalence)},
      {"observation_days", std::to_string(d.observation_days)},
      {"window_start", format_utc(d.window_start)},
      {"n_towers", std::to_string(d.n_towers)},
      {"n_zones", std::to_string(d.n_zones)},
      {"zone_illiteracy_weights", join_doubles(d.zone_illiteracy_weights)},
      {"seed", std::to_string(d.seed)},
      {"activity_sigma", csv::format_double(d.activity_sigma)},
      {"trait_sigma", csv::format_double(d.trait_sigma)},
      {"decay_jitter", csv::format_double(d.decay_jitter)},
      {"zone_radius", csv::format_double(d.zone_radius)},
      {"district_grid", std::to_string(d.district_grid)},
      {"lon_min", csv::format_double(d.lon_min)},
      {"lon_max", csv::format_double(d.lon_max)},
      {"lat_min", csv::format_double(d.lat_min)},
      {"lat_max", csv::format_double(d.lat_max)},
  };
  for (const auto* cls : {"illiterate", "literate"}) {
    const BehaviorProfile& p = std::string(cls) == "illiterate" ? d.illiterate : d.literate;
    for (const auto& f : profile_fields())
      keys.emplace_back(std::string(cls) + "." + f.key, csv::format_double(p.*(f.member)));
    keys.emplace_back(std::string(cls) + ".device_class_probs",
                      join_doubles({p.device_class_probs.begin(), p.device_class_probs.end()}));
  }
  return keys;
}

PopulationConfig PopulationConfig::from(const KeyValueConfig& kv) {
  std::set<std::string> known;
  for (const auto& [k, v] : documented_keys()) known.insert(k);
  kv.reject_unknown(known);

  PopulationConfig c;
  auto positive_count = [&](const std::string& key, std::size_t fallback) {
    const std::int64_t v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    require(v > 0, key + " must be positive");
    return static_cast<std::size_t>(v);
  };
  c.n_subscribers = positive_count("n_subscribers", c.n_subscribers);
  c.illiterate_prevalence = kv.get_double("illiterate_prevalence", c.illiterate_prevalence);
  c.observation_days = static_cast<int>(positive_count("observation_days", c.observation_days));
  if (kv.has("window_start")) {
    const std::string text = kv.get_string("window_start", "");
    auto t = parse_utc(text);
    require(t.has_value(), "window_start '" + text + "' is not YYYY-MM-DDTHH:MM:SSZ");
    c.window_start = *t;
  }
  c.n_towers = positive_count("n_towers", c.n_towers);
  c.n_zones = positive_count("n_zones", c.n_zones);
  c.zone_illiteracy_weights =
      kv.get_doubles("zone_illiteracy_weights", default_zone_weights(c.n_zones));
  const std::int64_t seed = kv.get_int("seed", static_cast<std::int64_t>(c.seed));
  c.seed = static_cast<std::uint64_t>(seed);
  c.activity_sigma = kv.get_double("activity_sigma", c.activity_sigma);
  c.trait_sigma = kv.get_double("trait_sigma", c.trait_sigma);
  c.decay_jitter = kv.get_double("decay_jitter", c.decay_jitter);
  c.zone_radius = kv.get_double("zone_radius", c.zone_radius);
  c.district_grid = positive_count("district_grid", c.district_grid);
  c.lon_min = kv.get_double("lon_min", c.lon_min);
  c.lon_max = kv.get_double("lon_max", c.lon_max);
  c.lat_min = kv.get_double("lat_min", c.lat_min);
  c.lat_max = kv.get_double("lat_max", c.lat_max);
  for (auto* cls : {"illiterate", "literate"}) {
    BehaviorProfile& p = std::string(cls) == "illiterate" ? c.illiterate : c.literate;
    for (const auto& f : profile_fields()) {
      const std::string key = std::string(cls) + "." + f.key;
      p.*(f.member) = kv.get_double(key, p.*(f.member));
    }
    const std::string key = std::string(cls) + ".device_class_probs";
    auto probs = kv.get_doubles(
        key, {p.device_class_probs.begin(), p.device_class_probs.end()});
    require(probs.size() == 3, key + " needs three entries (BASIC,FEATURE,SMART)");
    std::copy(probs.begin(), probs.end(), p.device_class_probs.begin());
  }
  c.validate();
  return c;
}

nlohmann::json PopulationConfig::to_json() const {
  nlohmann::json j;
  j["n_subscribers"] = n_subscribers;
  j["illiterate_prevalence"] = illiterate_prevalence;
  j["observation_days"] = observation_days;
  j["window_start"] = format_utc(window_start);
  j["n_towers"] = n_towers;
  j["n_zones"] = n_zones;
  j["zone_illiteracy_weights"] = zone_illiteracy_weights;
  j["seed"] = seed;
  j["activity_sigma"] = activity_sigma;
  j["trait_sigma"] = trait_sigma;
  j["decay_jitter"] = decay_jitter;
  j["zone_radius"] = zone_radius;
  j["district_grid"] = district_grid;
  j["bounding_box"] = {{"lon_min", lon_min}, {"lon_max", lon_max},
                       {"lat_min", lat_min}, {"lat_max", lat_max}};
  j["illiterate"] = profile_json(illiterate);
  j["literate"] = profile_json(literate);
  return j;
}

Population generate_population(const PopulationConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, "population"));
  Population pop;

  // Zone centres sit on a jittered ring. Zone z takes ring slot z * step
  // (mod n) with step coprime to n, so consecutive zones, and in particular the
  // leading high-weight ones, land apart from each other.
  const double r = config.zone_radius;
  const std::size_t nz = config.n_zones;
  std::size_t step = 1;
  for (std::size_t cand = (nz + 1) / 3; cand > 1; --cand)
    if (std::gcd(cand, nz) == 1) {
      step = cand;
      break;
    }
  const double ring = std::clamp(0.5 - r - 0.05, 0.0, 0.5);
  const double phase = 2.0 * M_PI * uniform01(rng);
  for (std::size_t z = 0; z < nz; ++z) {
    const std::size_t slot = (z * step) % nz;
    const double jitter = (uniform01(rng) - 0.5) * (M_PI / static_cast<double>(nz)) * 0.5;
    const double angle = phase + 2.0 * M_PI * static_cast<double>(slot) / static_cast<double>(nz) + jitter;
    const double rad = nz == 1 ? 0.0 : ring * (0.85 + 0.15 * uniform01(rng));
    pop.zones.push_back({0.5 + rad * std::cos(angle), 0.5 + rad * std::sin(angle),
                         config.zone_illiteracy_weights[z]});
  }

  auto to_lon = [&](double x) { return micro(config.lon_min + x * (config.lon_max - config.lon_min)); };
  auto to_lat = [&](double y) { return micro(config.lat_min + y * (config.lat_max - config.lat_min)); };

  pop.towers.reserve(config.n_towers);
  for (std::size_t t = 0; t < config.n_towers; ++t) {
    const std::size_t zi = t % config.n_zones;
    const double rho = r * std::sqrt(uniform01(rng));
    const double theta = 2.0 * M_PI * uniform01(rng);
    const double x = std::clamp(pop.zones[zi].cx + rho * std::cos(theta), 0.0, 1.0);
    const double y = std::clamp(pop.zones[zi].cy + rho * std::sin(theta), 0.0, 1.0);
    const auto g = config.district_grid;
    const auto col = std::min(g - 1, static_cast<std::size_t>(x * static_cast<double>(g)));
    const auto row = std::min(g - 1, static_cast<std::size_t>(y * static_cast<double>(g)));
    pop.towers.push_back({numbered("T", t + 1, 4), to_lon(x), to_lat(y),
                          numbered("DIST-", row * g + col + 1, 2)});
    pop.tower_zone.push_back(zi);
  }

  std::vector<std::vector<std::size_t>> zone_towers(config.n_zones);
  for (std::size_t t = 0; t < config.n_towers; ++t) zone_towers[pop.tower_zone[t]].push_back(t);

  // Exactly round(n * prevalence) illiterate subscribers, chosen by a partial shuffle.
  const std::size_t n = config.n_subscribers;
  const std::size_t n_ill = config.illiterate_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < n_ill && i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> illiterate(n, false);
  for (std::size_t i = 0; i < n_ill; ++i) illiterate[order[i]] = true;

  // Illiterate homes: zone with probability proportional to weight times tower
  // count, so equal weights reduce to uniform over towers. Literate homes:
  // uniform over towers.
  std::vector<double> ill_zone_w(config.n_zones);
  for (std::size_t z = 0; z < config.n_zones; ++z)
    ill_zone_w[z] = pop.zones[z].weight * static_cast<double>(zone_towers[z].size());
  const auto ill_zone_c = cumulate(ill_zone_w);

  std::normal_distribution<double> normal(0.0, 1.0);
  pop.traits.resize(n);
  pop.labels.reserve(n);
  pop.handsets.reserve(n);
  pop.home_tower.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = numbered("S", i + 1, 6);
    const BehaviorProfile& prof = illiterate[i] ? config.illiterate : config.literate;
    pop.labels.push_back({id, !illiterate[i]});

    if (illiterate[i]) {
      const auto& pool = zone_towers[pick(rng, ill_zone_c)];
      pop.home_tower[i] = pool[rng() % pool.size()];
    } else {
      pop.home_tower[i] = static_cast<std::size_t>(rng() % config.n_towers);
    }

    const auto dc_c = cumulate({prof.device_class_probs.begin(), prof.device_class_probs.end()});
    const auto dc = static_cast<DeviceClass>(pick(rng, dc_c));
    const auto& models = models_for(dc);
    const auto& m = models[rng() % models.size()];
    const bool camera = dc == DeviceClass::kSmart || (dc == DeviceClass::kFeature && uniform01(rng) < 0.6);
    pop.handsets.push_back({id, m.manufacturer, m.brand, camera, dc});

    auto lognormal = [&](double s) { return std::exp(s * normal(rng) - 0.5 * s * s); };
    Traits& tr = pop.traits[i];
    const double act = lognormal(config.activity_sigma);
    tr.voice = act * lognormal(config.trait_sigma);
    tr.sms_in = act * lognormal(config.trait_sigma);
    tr.sms_out = act * lognormal(config.trait_sigma);
    // Session counts follow the data plan more than usage; usage shows in volume.
    tr.data = lognormal(0.25 * config.trait_sigma);
    tr.volume = act * lognormal(config.trait_sigma);
    tr.other = act * lognormal(config.trait_sigma);
    tr.contacts = lognormal(config.trait_sigma);
    tr.places = lognormal(config.trait_sigma);
    tr.decay = config.decay_jitter * normal(rng);
  }

  // Normalise every multiplier to a sample mean of exactly one per class so
  // the configured rates are the realised class means.
  for (double Traits::*m : {&Traits::voice, &Traits::sms_in, &Traits::sms_out, &Traits::data,
                            &Traits::volume, &Traits::other, &Traits::contacts, &Traits::places}) {
    for (bool cls : {true, false}) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (illiterate[i] == cls) sum += pop.traits[i].*m, ++count;
      if (count == 0) continue;
      const double scale = static_cast<double>(count) / sum;
      for (std::size_t i = 0; i < n; ++i)
        if (illiterate[i] == cls) pop.traits[i].*m *= scale;
    }
  }
  return pop;
}

SubscriberStreams generate_subscriber(const Population& pop, const PopulationConfig& config,
                                      std::size_t i) {
  if (i >= pop.labels.size()) throw InvariantError("subscriber index out of range");
  std::mt19937_64 rng(derive_seed(config.seed, "subscriber", i));
  const auto& label = pop.labels[i];
  const BehaviorProfile& prof = label.literate ? config.literate : config.illiterate;
  const Traits& tr = pop.traits[i];
  const std::string& id = label.subscriber_id;

  // Contact pool with geometric weights.
  const std::size_t n_contacts = 1 + poisson(rng, (prof.contact_pool_size - 1.0) * tr.contacts);
  const double decay = std::clamp(prof.contact_decay + tr.decay, 0.05, 1.0);
  std::vector<std::string> contacts;
  std::vector<double> cw;
  for (std::size_t j = 0; j < n_contacts; ++j) {
    const std::uint64_t h = derive_seed(config.seed, "peer:" + id, j);
    contacts.push_back(numbered("01", static_cast<std::size_t>(h % 1000000000ULL), 9));
    cw.push_back(std::pow(decay, static_cast<double>(j)));
  }
  const auto contact_c = cumulate(cw);

  // Place pool: home plus towers drawn from the home's neighbourhood.
  const std::size_t home = pop.home_tower[i];
  const std::size_t n_places =
      std::min(pop.towers.size(), 1 + poisson(rng, (prof.places_pool_size - 1.0) * tr.places));
  std::vector<std::size_t> places{home};
  if (n_places > 1) {
    const geo::LonLat h{pop.towers[home].longitude, pop.towers[home].latitude};
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t t = 0; t < pop.towers.size(); ++t)
      if (t != home)
        near.emplace_back(geo::haversine_km(h, {pop.towers[t].longitude, pop.towers[t].latitude}), t);
    std::sort(near.begin(), near.end());
    near.resize(std::min(near.size(), 3 * (n_places - 1)));
    for (std::size_t k = 0; k + 1 < n_places; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng() % (near.size() - k));
      std::swap(near[k], near[j]);
      places.push_back(near[k].second);
    }
  }
  std::vector<double> pw(places.size(), places.size() > 1
                                            ? (1.0 - prof.home_share) / static_cast<double>(places.size() - 1)
                                            : 1.0);
  pw[0] = places.size() > 1 ? prof.home_share : 1.0;
  const auto place_c = cumulate(pw);

  struct Stream {
    Channel channel;
    Direction direction;
    double rate;
  };
  const std::array<Stream, 11> streams = {{
      {Channel::kVoice, Direction::kOut, prof.voice_out_per_day * tr.voice},
      {Channel::kVoice, Direction::kIn, prof.voice_in_per_day * tr.voice},
      {Channel::kSms, Direction::kOut, prof.sms_out_per_day * tr.sms_out},
      {Channel::kSms, Direction::kIn, prof.sms_in_per_day * tr.sms_in},
      {Channel::kMms, Direction::kOut, prof.mms_out_per_day * tr.other},
      {Channel::kMms, Direction::kIn, prof.mms_in_per_day * tr.other},
      {Channel::kVideo, Direction::kOut, prof.video_out_per_day * tr.other},
      {Channel::kVideo, Direction::kIn, prof.video_in_per_day * tr.other},
      {Channel::kData, Direction::kOut, prof.data_sessions_per_day * tr.data},
      {Channel::kVas, Direction::kOut, prof.vas_out_per_day * tr.other},
      {Channel::kVas, Direction::kIn, prof.vas_in_per_day * tr.other},
  }};

  SubscriberStreams out;
  for (int d = 0; d < config.observation_days; ++d) {
    const EpochSeconds day_start = config.window_start + d * kDay;
    for (const auto& s : streams) {
      const std::size_t k = poisson(rng, s.rate);
      for (std::size_t e = 0; e < k; ++e) {
        ingest::CdrEvent ev;
        ev.subscriber_id = id;
        ev.timestamp = day_start + static_cast<EpochSeconds>(rng() % kDay);
        ev.direction = s.direction;
        ev.channel = s.channel;
        ev.tower_id = pop.towers[places[pick(rng, place_c)]].tower_id;
        std::int64_t duration = 0, volume = 0;
        if (ingest::has_peer(s.channel)) ev.peer_id = contacts[pick(rng, contact_c)];
        if (s.channel == Channel::kVoice || s.channel == Channel::kVideo) {
          const double mean = s.channel == Channel::kVoice ? prof.voice_mean_duration_s
                                                           : prof.video_mean_duration_s;
          duration = std::max<std::int64_t>(1, std::llround(exponential(rng, mean)));
          ev.duration_s = duration;
        }
        if (s.channel == Channel::kData) {
          volume = std::max<std::int64_t>(1, std::llround(exponential(rng, prof.data_mean_volume_bytes * tr.volume)));
          ev.volume_bytes = volume;
        }
        ev.charge = charge_for(s.channel, s.direction, duration, volume);
        out.events.push_back(std::move(ev));
      }
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  // Top-ups: exponential gaps, amounts lognormal around the class mean and
  // snapped to retail denominations.
  const EpochSeconds end = config.window().end();
  std::normal_distribution<double> normal(0.0, 1.0);
  double t = static_cast<double>(config.window_start) + exponential(rng, prof.topup_mean_gap_days * kDay);
  while (t < static_cast<double>(end)) {
    const double raw = prof.topup_mean_amount * std::exp(0.4 * normal(rng) - 0.08);
    out.topups.push_back({id, static_cast<EpochSeconds>(t), snap_denomination(raw)});
    t += exponential(rng, prof.topup_mean_gap_days * kDay);
  }
  return out;
}

void generate_events(const Population& pop, const PopulationConfig& config,
                     const std::function<void(std::size_t, SubscriberStreams&&)>& sink,
                     unsigned threads) {
  constexpr std::size_t kChunk = 256;
  const std::size_t n = pop.labels.size();
  for (std::size_t base = 0; base < n; base += kChunk) {
    const std::size_t m = std::min(kChunk, n - base);
    std::vector<SubscriberStreams> chunk(m);
    parallel_for(m, threads, [&](std::size_t k) { chunk[k] = generate_subscriber(pop, config, base + k); });
    for (std::size_t k = 0; k < m; ++k) sink(base + k, std::move(chunk[k]));
  }
}

const std::vector<std::string>& planted_signal_features() {
  static const std::vector<std::string> names = {"home_longitude", "home_latitude",
                                                 "sms_in_count",   "contacts_entropy",
                                                 "data_volume",    "places_visited"};
  return names;
}

namespace {

struct ClassTally {
  std::size_t subscribers = 0;
  std::map<std::string, double> sums;  // per-subscriber quantities summed over the class

  nlohmann::json means(int days) const {
    nlohmann::json j;
    j["subscribers"] = subscribers;
    const double n = subscribers ? static_cast<double>(subscribers) : 1.0;
    for (const auto& [k, v] : sums) {
      if (k.ends_with("_count"))
        j[k.substr(0, k.size() - 6) + "_per_day"] = v / n / days;
      else
        j[k] = v / n;
    }
    return j;
  }
};

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace

nlohmann::json write_dataset(const std::string& dir, const PopulationConfig& config, unsigned threads) {
  namespace fs = std::filesystem;
  const Population pop = generate_population(config);
  fs::create_directories(dir);
  const fs::path root(dir);

  {
    auto out = open_out(root / "towers.csv");
    ingest::write_csv<ingest::Tower>(out, ingest::kTowerHeader, pop.towers);
  }
  {
    auto out = open_out(root / "handsets.csv");
    ingest::write_csv<ingest::HandsetRecord>(out, ingest::kHandsetHeader, pop.handsets);
  }
  {
    auto out = open_out(root / "labels.csv");
    ingest::write_csv<ingest::LiteracyLabel>(out, ingest::kLabelHeader, pop.labels);
  }

  ClassTally tally[2];  // [0] illiterate, [1] literate
  std::size_t cdr_rows = 0, topup_rows = 0;
  {
    auto cdr = open_out(root / "cdr.csv");
    auto top = open_out(root / "topups.csv");
    cdr << ingest::kCdrHeader << '\n';
    top << ingest::kTopUpHeader << '\n';
    generate_events(pop, config, [&](std::size_t i, SubscriberStreams&& s) {
      ClassTally& t = tally[pop.labels[i].literate ? 1 : 0];
      ++t.subscribers;
      std::map<std::string, double> peers;
      std::set<std::string> towers;
      for (const auto& e : s.events) {
        ingest::write_row(cdr, e);
        std::string key = std::string(ingest::to_token(e.channel)) + "_" +
                          (e.direction == Direction::kIn ? "in" : "out") + "_count";
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        t.sums[key] += 1.0;
        if (e.volume_bytes) t.sums["data_volume_bytes"] += static_cast<double>(*e.volume_bytes);
        if (e.peer_id) peers[*e.peer_id] += 1.0;
        towers.insert(e.tower_id);
      }
      std::vector<double> counts;
      for (const auto& [p, c] : peers) counts.push_back(c);
      t.sums["contacts_entropy"] += counts.empty() ? 0.0 : features::shannon_entropy(counts);
      t.sums["places_visited"] += static_cast<double>(towers.size());
      double topped = 0.0;
      for (const auto& u : s.topups) {
        ingest::write_row(top, u);
        topped += u.amount;
      }
      t.sums["topup_total"] += topped;
      t.sums["topups"] += static_cast<double>(s.topups.size());
      cdr_rows += s.events.size();
      topup_rows += s.topups.size();
    }, threads);
    if (!cdr || !top) throw DataError("failed writing event files in " + dir);
  }

  nlohmann::json manifest;
  manifest["generator"] = {{"tool", "litmap"}, {"version", kToolVersion}};
  manifest["seed"] = config.seed;
  manifest["config"] = config.to_json();
  manifest["planted_signals"] = planted_signal_features();
  manifest["class_profiles"] = {{"illiterate", profile_json(config.illiterate)},
                                {"literate", profile_json(config.literate)}};
  manifest["empirical_means"] = {{"illiterate", tally[0].means(config.observation_days)},
                                 {"literate", tally[1].means(config.observation_days)}};
  nlohmann::json zones = nlohmann::json::array();
  double mean_w = 0.0;
  for (const auto& z : pop.zones) mean_w += z.weight / static_cast<double>(pop.zones.size());
  for (std::size_t zi = 0; zi < pop.zones.size(); ++zi) {
    const auto& z = pop.zones[zi];
    nlohmann::json towers = nlohmann::json::array();
    for (std::size_t t = 0; t < pop.towers.size(); ++t)
      if (pop.tower_zone[t] == zi) towers.push_back(pop.towers[t].tower_id);
    zones.push_back({{"index", zi},
                     {"center_longitude", config.lon_min + z.cx * (config.lon_max - config.lon_min)},
                     {"center_latitude", config.lat_min + z.cy * (config.lat_max - config.lat_min)},
                     {"weight", z.weight},
                     {"high_illiteracy", z.weight > mean_w},
                     {"towers", towers}});
  }
  manifest["zones"] = zones;
  nlohmann::json files;
  const std::map<std::string, std::size_t> rows = {{"cdr.csv", cdr_rows},
                                                   {"topups.csv", topup_rows},
                                                   {"towers.csv", pop.towers.size()},
                                                   {"handsets.csv", pop.handsets.size()},
                                                   {"labels.csv", pop.labels.size()}};
  for (const auto& [name, n] : rows)
    files[name] = {{"rows", n}, {"digest", file_digest((root / name).string())}};
  manifest["files"] = files;

  auto out = open_out(root / "manifest.json");
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace litmap::synth
