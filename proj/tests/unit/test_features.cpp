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
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "litmap/common.hpp"
#include "litmap/density.hpp"
#include "litmap/features.hpp"
#include "litmap/geodesy.hpp"
#include "litmap/matrix_io.hpp"

using namespace litmap;
using namespace litmap::features;
using ingest::Channel;
using ingest::Direction;

namespace {

const ObservationWindow kWindow{*parse_utc("2016-01-04T00:00:00Z"), 30};

std::vector<ingest::TopUpEvent> topups_of(const std::vector<double>& amounts) {
  std::vector<ingest::TopUpEvent> out;
  for (std::size_t i = 0; i < amounts.size(); ++i)
    out.push_back({"s1", kWindow.start + static_cast<EpochSeconds>(i) * 86400 * 3 + 3600, amounts[i]});
  return out;
}

PartialFeatures finance(const std::vector<ingest::TopUpEvent>& t) {
  static const HandsetEncoding enc;
  return financial_features(t, {}, nullptr, enc, kWindow);
}

double rg_of(const std::vector<ingest::Tower>& towers, const std::vector<std::size_t>& visits) {
  std::vector<ingest::CdrEvent> events;
  for (std::size_t t = 0; t < visits.size(); ++t)
    for (std::size_t k = 0; k < visits[t]; ++k)
      events.push_back(testing::event("s1", kWindow.start + 60 * static_cast<EpochSeconds>(events.size()),
                                      Direction::kOut, Channel::kSms, towers[t].tower_id));
  const TowerIndex index(towers);
  return *mobility_features(events, index, kWindow).get("radius_of_gyration_km");
}

}  // namespace

TEST_CASE("recharge statistics of {10, 10, 20} over 30 days") {
  const auto f = finance(topups_of({10, 10, 20}));
  CHECK(*f.get("recharge_amount_mean") == doctest::Approx(13.333333333333334).epsilon(1e-12));
  CHECK(*f.get("recharge_fraction_lowest") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(*f.get("recharge_fraction_highest") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(*f.get("spending_speed") == doctest::Approx(1.3333333333333333).epsilon(1e-12));
}

TEST_CASE("single and missing top-ups") {
  const auto one = finance(topups_of({50}));
  CHECK(*one.get("recharge_amount_var") == 0.0);
  CHECK(*one.get("recharge_amount_cov") == 0.0);
  CHECK(*one.get("recharge_fraction_lowest") == 1.0);
  CHECK(*one.get("recharge_fraction_highest") == 1.0);

  const auto none = finance({});
  for (const char* n : {"recharge_count", "recharge_amount_mean", "spending_speed",
                        "recharge_weekly_total_var"}) {
    CHECK(none.contains(n));
    CHECK_FALSE(none.get(n).has_value());
  }
}

TEST_CASE("property: scaling every top-up by c scales levels by c and keeps shape") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_real_distribution<double> amount(1.0, 500.0), scale(0.1, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(count(rng));
    for (auto& x : a) x = std::round(amount(rng));
    const double c = scale(rng);
    std::vector<double> b;
    for (double x : a) b.push_back(x * c);
    const auto fa = finance(topups_of(a));
    const auto fb = finance(topups_of(b));
    for (const char* n : {"recharge_amount_mean", "recharge_amount_median", "recharge_amount_min",
                          "recharge_amount_max", "recharge_amount_std", "spending_speed",
                          "recharge_weekly_total_mean", "recharge_monthly_total_mean"})
      REQUIRE(*fb.get(n) == doctest::Approx(c * *fa.get(n)).epsilon(1e-9));
    REQUIRE(*fb.get("recharge_amount_var") == doctest::Approx(c * c * *fa.get("recharge_amount_var")).epsilon(1e-9));
    for (const char* n : {"recharge_count", "recharge_amount_cov", "recharge_fraction_lowest",
                          "recharge_fraction_highest", "recharge_gap_mean_days"}) {
      if (!fa.get(n)) continue;
      REQUIRE(*fb.get(n) == doctest::Approx(*fa.get(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("entropy examples") {
  const std::vector<double> c{1, 1, 2};
  CHECK(shannon_entropy(c) == doctest::Approx(1.0397207708399179).epsilon(1e-12));
  const std::vector<double> two{5, 5};
  CHECK(shannon_entropy(two) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const std::vector<double> one{10};
  CHECK(shannon_entropy(one) == 0.0);
}

TEST_CASE("property: entropy lies in [0, ln k] with the extremes where expected") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> k_dist(1, 40), c_dist(0, 50);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> counts(k_dist(rng));
    for (auto& x : counts) x = c_dist(rng);
    counts[0] += 1;  // at least one positive count
    const auto k = std::count_if(counts.begin(), counts.end(), [](double x) { return x > 0; });
    const double h = shannon_entropy(counts);
    REQUIRE(h >= 0.0);
    REQUIRE(h <= std::log(static_cast<double>(k)) + 1e-12);
    if (k == 1) REQUIRE(h == 0.0);

    std::vector<double> uniform(k_dist(rng), static_cast<double>(c_dist(rng) + 1));
    REQUIRE(shannon_entropy(uniform) ==
            doctest::Approx(std::log(static_cast<double>(uniform.size()))).epsilon(1e-12));
  }
}

TEST_CASE("radius of gyration examples") {
  const double dlat = 0.01798640727449076;  // 2 km along a meridian
  std::vector<ingest::Tower> towers{{"T1", 90.4, 23.75, "D"}, {"T2", 90.4, 23.75 + dlat, "D"}};
  CHECK(rg_of(towers, {2, 2}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rg_of(towers, {5, 0}) == 0.0);

  const TowerIndex index(towers);
  std::vector<ingest::CdrEvent> events;
  for (int i = 0; i < 4; ++i)
    events.push_back(testing::event("s1", kWindow.start + i, Direction::kIn, Channel::kSms, "T1"));
  const auto m = mobility_features(events, index, kWindow);
  CHECK(*m.get("places_visited") == 1.0);
  CHECK(*m.get("places_entropy") == 0.0);
  CHECK(*m.get("radius_of_gyration_km") == 0.0);

  const auto none = mobility_features({}, index, kWindow);
  CHECK_FALSE(none.get("radius_of_gyration_km").has_value());
}

TEST_CASE("property: r_g is non-negative, zero only at one location, and longitude-shift invariant") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n_dist(1, 8), v_dist(0, 6);
  std::uniform_real_distribution<double> lon(90.3, 90.5), lat(23.6, 23.9), shift(-60.0, 60.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    std::vector<ingest::Tower> towers;
    std::vector<std::size_t> visits;
    for (int t = 0; t < n; ++t) {
      towers.push_back({"T" + std::to_string(t), lon(rng), lat(rng), "D"});
      visits.push_back(static_cast<std::size_t>(v_dist(rng)));
    }
    visits[0] += 1;
    const auto used = std::count_if(visits.begin(), visits.end(), [](auto v) { return v > 0; });
    const double rg = rg_of(towers, visits);
    REQUIRE(rg >= 0.0);
    if (used == 1)
      REQUIRE(rg == 0.0);
    else
      REQUIRE(rg > 0.0);

    const double dl = shift(rng);
    auto moved = towers;
    for (auto& t : moved) t.longitude += dl;
    REQUIRE(rg_of(moved, visits) == doctest::Approx(rg).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("social counts and contact entropy") {
  std::vector<ingest::CdrEvent> ev;
  for (int i = 0; i < 5; ++i) ev.push_back(testing::event("s1", kWindow.start + i, Direction::kIn, Channel::kVoice, "T1", "A"));
  for (int i = 0; i < 5; ++i) ev.push_back(testing::event("s1", kWindow.start + 10 + i, Direction::kOut, Channel::kVoice, "T1", "B"));
  auto f = social_features(ev, kWindow);
  CHECK(*f.get("contacts_entropy") == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(*f.get("degree") == 2.0);
  CHECK(*f.get("interactions_per_contact") == 5.0);

  std::vector<ingest::CdrEvent> single(ev.begin(), ev.begin() + 5);
  CHECK(*social_features(single, kWindow).get("contacts_entropy") == 0.0);

  std::vector<ingest::CdrEvent> sms;
  for (int i = 0; i < 3; ++i) sms.push_back(testing::event("s1", kWindow.start + i, Direction::kIn, Channel::kSms, "T1"));
  sms.push_back(testing::event("s1", kWindow.start + 9, Direction::kOut, Channel::kSms, "T1"));
  auto g = social_features(sms, kWindow);
  CHECK(*g.get("sms_in_count") == 3.0);
  CHECK(*g.get("sms_out_count") == 1.0);

  auto none = social_features({}, kWindow);
  CHECK(*none.get("degree") == 0.0);
  CHECK_FALSE(none.get("contacts_entropy").has_value());
}

TEST_CASE("home tower ties break to the smallest id") {
  std::vector<ingest::CdrEvent> ev{
      testing::event("s1", 1, Direction::kIn, Channel::kSms, "T9"),
      testing::event("s1", 2, Direction::kIn, Channel::kSms, "T2"),
      testing::event("s1", 3, Direction::kIn, Channel::kSms, "T9"),
      testing::event("s1", 4, Direction::kIn, Channel::kSms, "T2")};
  CHECK(home_tower(ev) == std::optional<std::string>("T2"));
}

namespace {

Bundle small_bundle() {
  Bundle b;
  b.towers = {{"T1", 90.40, 23.75, "A"}, {"T2", 90.41, 23.76, "B"}};
  b.labels = {{"s2", true}, {"s1", false}};
  b.handsets = {{"s1", "Acme", "A1", true, ingest::DeviceClass::kSmart}};
  b.topups = {{"s1", kWindow.start + 100, 20.0}};
  for (int i = 0; i < 6; ++i) {
    b.events.push_back(testing::event("s1", kWindow.start + 1000 * i, Direction::kOut, Channel::kSms, i % 3 ? "T1" : "T2", "x"));
    b.events.push_back(testing::event("s2", kWindow.start + 1000 * i + 7, Direction::kIn, Channel::kVoice, "T2", "y"));
  }
  return b;
}

}  // namespace

TEST_CASE("featurize shapes, masks and ordering") {
  auto b = small_bundle();
  const auto r = featurize(b, kWindow);
  const auto& m = r.matrix;
  CHECK(m.rows() == 2);
  CHECK(m.cols() == FeatureCatalog::default_catalog().size());
  CHECK(m.ids == std::vector<std::string>{"s1", "s2"});
  const auto mean_col = *m.column_index("recharge_amount_mean");
  CHECK_FALSE(m.is_missing(0, mean_col));
  CHECK(m.is_missing(1, mean_col));
  CHECK(std::isnan(m.at(1, mean_col)));
  CHECK_FALSE(m.is_missing(1, *m.column_index("voice_in_count")));
  CHECK(r.home_towers.at("s1") == "T1");

  std::reverse(b.events.begin(), b.events.end());
  std::reverse(b.labels.begin(), b.labels.end());
  const auto again = featurize(b, kWindow);
  CHECK(again.matrix.ids == m.ids);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK((m.values[i] == again.matrix.values[i] ||
           (std::isnan(m.values[i]) && std::isnan(again.matrix.values[i]))));
  CHECK(again.matrix.missing == m.missing);

  const auto parallel = featurize(small_bundle(), kWindow, 4);
  CHECK(parallel.matrix.missing == m.missing);
}

TEST_CASE("assembly rejects unknown features") {
  PartialFeatures p;
  p.set("not_a_feature", 1.0);
  std::vector<SubscriberPartials> subs{{"s1", {p}}};
  CHECK_THROWS_AS(assemble_matrix(subs, FeatureCatalog::default_catalog()), DataError);
}

TEST_CASE("matrix CSV round trip is exact") {
  const auto m = featurize(small_bundle(), kWindow).matrix;
  std::ostringstream mat, cat;
  write_matrix_csv(mat, m);
  write_catalog_csv(cat, m);
  std::istringstream mi(mat.str()), ci(cat.str());
  const auto back = read_matrix(mi, ci);
  CHECK(back.ids == m.ids);
  CHECK(back.columns == m.columns);
  CHECK(back.missing == m.missing);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    if (!m.missing[i]) CHECK(back.values[i] == m.values[i]);
}

TEST_CASE("density histograms") {
  FeatureMatrix m;
  m.catalog_version = "t";
  m.columns = {{"flag", Family::kSocial, Kind::kNumeric}, {"flat", Family::kSocial, Kind::kNumeric}};
  const std::vector<double> flag{0, 1, 1, 0, 0, 1, 1, 1};
  std::unique_ptr<bool[]> ill(new bool[8]{true, true, true, true, false, false, false, false});
  for (std::size_t r = 0; r < 8; ++r) m.ids.push_back("s" + std::to_string(r));
  for (std::size_t r = 0; r < 8; ++r) {
    m.values.push_back(flag[r]);
    m.values.push_back(3.0);
    m.missing.push_back(0);
    m.missing.push_back(0);
  }
  const std::span<const bool> labels(ill.get(), 8);
  const auto d = feature_density(m, labels, "flag", 2);
  CHECK(d.illiterate == std::vector<double>{0.5, 0.5});
  CHECK(d.literate == std::vector<double>{0.25, 0.75});

  const auto c = feature_density(m, labels, "flat", 5);
  CHECK(std::count(c.illiterate.begin(), c.illiterate.end(), 1.0) == 1);
  CHECK(std::count(c.literate.begin(), c.literate.end(), 1.0) == 1);

  CHECK_THROWS_AS(feature_density(m, labels, "flg", 5), ConfigError);
  CHECK(near_matches(m, "flg").front() == "flag");
}
