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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "litmap/common.hpp"
#include "litmap/density.hpp"
#include "litmap/features.hpp"
#include "litmap/synth.hpp"

using namespace litmap;
using namespace litmap::synth;

namespace {

PopulationConfig small_config(std::size_t n = 400, int days = 20) {
  PopulationConfig c;
  c.n_subscribers = n;
  c.observation_days = days;
  c.n_towers = 40;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

features::Bundle bundle_of(const PopulationConfig& c, const Population& pop) {
  features::Bundle b;
  b.towers = pop.towers;
  b.handsets = pop.handsets;
  b.labels = pop.labels;
  generate_events(pop, c, [&](std::size_t, SubscriberStreams&& s) {
    std::move(s.events.begin(), s.events.end(), std::back_inserter(b.events));
    std::move(s.topups.begin(), s.topups.end(), std::back_inserter(b.topups));
  });
  return b;
}

}  // namespace

TEST_CASE("prevalence rounds to an exact label count") {
  PopulationConfig c;
  c.n_subscribers = 1000;
  c.observation_days = 1;
  const auto pop = generate_population(c);
  const auto ill = std::count_if(pop.labels.begin(), pop.labels.end(),
                                 [](const auto& l) { return !l.literate; });
  CHECK(ill == 68);
  CHECK(std::is_sorted(pop.labels.begin(), pop.labels.end(),
                       [](const auto& a, const auto& b) { return a.subscriber_id < b.subscriber_id; }));
}

TEST_CASE("same seed gives byte-identical files regardless of thread count") {
  testing::TempDir a("synth-a"), b("synth-b");
  const auto c = small_config();
  write_dataset(a.str(), c, 1);
  write_dataset(b.str(), c, 4);
  for (const char* f : {"cdr.csv", "topups.csv", "towers.csv", "handsets.csv", "labels.csv",
                        "manifest.json"})
    CHECK_MESSAGE(slurp(a.file(f)) == slurp(b.file(f)), f);

  auto other = c;
  other.seed = 43;
  testing::TempDir d("synth-d");
  write_dataset(d.str(), other, 1);
  CHECK(slurp(a.file("cdr.csv")) != slurp(d.file("cdr.csv")));
}

TEST_CASE("equal zone weights home illiterates uniformly across zones") {
  PopulationConfig c;
  c.n_subscribers = 16000;
  c.illiterate_prevalence = 0.5;
  c.observation_days = 1;
  c.zone_illiteracy_weights.assign(c.n_zones, 1.0);
  const auto pop = generate_population(c);

  std::vector<double> observed(c.n_zones, 0.0);
  std::size_t n_ill = 0;
  for (std::size_t i = 0; i < pop.labels.size(); ++i) {
    if (pop.labels[i].literate) continue;
    observed[pop.tower_zone[pop.home_tower[i]]] += 1.0;
    ++n_ill;
  }
  std::vector<double> towers_per_zone(c.n_zones, 0.0);
  for (auto z : pop.tower_zone) towers_per_zone[z] += 1.0;
  std::vector<double> p(c.n_zones);
  for (std::size_t z = 0; z < c.n_zones; ++z) p[z] = towers_per_zone[z] / static_cast<double>(c.n_towers);

  auto chi2 = [&](const std::vector<double>& counts) {
    double s = 0.0;
    for (std::size_t z = 0; z < counts.size(); ++z) {
      const double e = p[z] * static_cast<double>(n_ill);
      s += (counts[z] - e) * (counts[z] - e) / e;
    }
    return s;
  };
  const double stat = chi2(observed);

  // Reference distribution of the statistic by direct multinomial simulation.
  std::mt19937_64 rng(99);
  std::discrete_distribution<std::size_t> zone(p.begin(), p.end());
  std::vector<double> sims;
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> counts(c.n_zones, 0.0);
    for (std::size_t k = 0; k < n_ill; ++k) counts[zone(rng)] += 1.0;
    sims.push_back(chi2(counts));
  }
  std::sort(sims.begin(), sims.end());
  const double critical = sims[static_cast<std::size_t>(0.999 * sims.size())];
  INFO("chi2 = " << stat << ", simulated 99.9th percentile = " << critical);
  CHECK(stat < critical);
}

TEST_CASE("zero data rate produces no DATA events for that class") {
  auto c = small_config(300, 10);
  c.illiterate_prevalence = 0.3;
  c.illiterate.data_sessions_per_day = 0.0;
  const auto pop = generate_population(c);
  std::size_t ill_data = 0, lit_data = 0;
  generate_events(pop, c, [&](std::size_t i, SubscriberStreams&& s) {
    for (const auto& e : s.events)
      if (e.channel == ingest::Channel::kData) (pop.labels[i].literate ? lit_data : ill_data)++;
  });
  CHECK(ill_data == 0);
  CHECK(lit_data > 0);
}

TEST_CASE("a contact pool of one gives a single peer and zero contact entropy") {
  auto c = small_config(100, 10);
  c.illiterate.contact_pool_size = 1.0;
  c.literate.contact_pool_size = 1.0;
  const auto pop = generate_population(c);
  const auto b = bundle_of(c, pop);
  std::map<std::string, std::set<std::string>> peers;
  for (const auto& e : b.events)
    if (e.peer_id) peers[e.subscriber_id].insert(*e.peer_id);
  for (const auto& [sub, set] : peers) CHECK(set.size() == 1);

  const auto m = features::featurize(b, c.window()).matrix;
  const auto col = *m.column_index("contacts_entropy");
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (!m.is_missing(r, col)) CHECK(m.at(r, col) == 0.0);
}

TEST_CASE("generated bundles validate cleanly") {
  const auto c = small_config();
  const auto pop = generate_population(c);
  const auto b = bundle_of(c, pop);
  const auto r = ingest::validate_bundle(b.events, b.topups, b.towers, b.handsets, b.labels, c.window());
  CHECK(r.empty());
}

TEST_CASE("default profiles: incoming SMS per day within 5% of the configured rate") {
  const PopulationConfig c;
  const auto pop = generate_population(c);
  double sms_in[2] = {0, 0};
  double n[2] = {0, 0};
  for (const auto& l : pop.labels) n[l.literate ? 1 : 0] += 1;
  generate_events(pop, c, [&](std::size_t i, SubscriberStreams&& s) {
    const int k = pop.labels[i].literate ? 1 : 0;
    for (const auto& e : s.events)
      if (e.channel == ingest::Channel::kSms && e.direction == ingest::Direction::kIn) sms_in[k] += 1;
  }, 4);
  const double days = c.observation_days;
  const double ill = sms_in[0] / n[0] / days, lit = sms_in[1] / n[1] / days;
  INFO("illiterate " << ill << " literate " << lit);
  CHECK(std::abs(ill / c.illiterate.sms_in_per_day - 1.0) <= 0.05);
  CHECK(std::abs(lit / c.literate.sms_in_per_day - 1.0) <= 0.05);
}

TEST_CASE("planted features are lower on average for the illiterate class") {
  auto c = small_config(1500, 30);
  c.n_towers = 120;
  c.illiterate_prevalence = 0.3;
  const auto pop = generate_population(c);
  const auto m = features::featurize(bundle_of(c, pop), c.window(), 4).matrix;
  std::map<std::string, bool> literate;
  for (const auto& l : pop.labels) literate[l.subscriber_id] = l.literate;

  for (const char* name : {"sms_in_count", "contacts_entropy", "data_volume", "places_visited"}) {
    const auto col = *m.column_index(name);
    double s[2] = {0, 0}, k[2] = {0, 0};
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (m.is_missing(r, col)) continue;
      const int g = literate.at(m.ids[r]) ? 1 : 0;
      s[g] += m.at(r, col);
      k[g] += 1;
    }
    INFO(name << ": illiterate " << s[0] / k[0] << " literate " << s[1] / k[1]);
    CHECK(s[0] / k[0] < s[1] / k[1]);
  }

  auto ill = std::make_unique<bool[]>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) ill[r] = !literate.at(m.ids[r]);
  const auto d = features::feature_density(m, {ill.get(), m.rows()}, "sms_in_count", 20);
  CHECK(features::ClassDensity::mean_bin(d.illiterate) < features::ClassDensity::mean_bin(d.literate));
}

TEST_CASE("configuration keys") {
  KeyValueConfig kv = KeyValueConfig::parse("n_subscribers = 300\nliterate.sms_in_per_day = 2.5\n");
  const auto c = PopulationConfig::from(kv);
  CHECK(c.n_subscribers == 300);
  CHECK(c.literate.sms_in_per_day == 2.5);

  CHECK_THROWS_AS(PopulationConfig::from(KeyValueConfig::parse("n_subscriber = 3\n")), ConfigError);
  try {
    PopulationConfig::from(KeyValueConfig::parse("illiterate_prevalence =\n"));
    FAIL("empty value accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("illiterate_prevalence") != std::string::npos);
  }
}
