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
#include <random>
#include <sstream>

#include "json.hpp"
#include "litmap/common.hpp"
#include "litmap/geodesy.hpp"
#include "litmap/geomap.hpp"

using namespace litmap;
using namespace litmap::geo;

namespace {

GridSpec spec_k(std::size_t k, double power = 2.0) {
  GridSpec g;
  g.k = k;
  g.power = power;
  return g;
}

Surface tiny_surface(std::vector<std::optional<double>> values, std::size_t nx) {
  Surface s;
  s.spec.lon_min = 0;
  s.spec.lat_min = 0;
  s.spec.cell_size = 1;
  s.nx = nx;
  s.ny = values.size() / nx;
  s.spec.lon_max = static_cast<double>(s.nx);
  s.spec.lat_max = static_cast<double>(s.ny);
  for (std::size_t j = 0; j < s.ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      s.cells.push_back({i + 0.5, j + 0.5, values[j * nx + i]});
  return s;
}

}  // namespace

TEST_CASE("haversine sanity") {
  CHECK(haversine_km({0, 0}, {0, 0}) == 0.0);
  CHECK(haversine_km({0, 0}, {0, 1}) == doctest::Approx(kEarthRadiusKm * M_PI / 180).epsilon(1e-12));
  const LonLat pts[] = {{0, 0}, {0, 2}};
  const double w[] = {1, 1};
  const auto c = spherical_centroid(pts, w);
  CHECK(c.lat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("IDW worked examples") {
  const std::vector<LonLat> sites{{0, 0}, {0, 2}};
  const std::vector<double> values{10, 20};
  const IdwSampler s(sites, values);
  CHECK(*s.interpolate({0, 0.5}, spec_k(8)) == doctest::Approx(11.0).epsilon(1e-12));
  CHECK(*s.interpolate({0, 1}, spec_k(8)) == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(*s.interpolate({0, 0}, spec_k(8)) == 10.0);
  CHECK(*s.interpolate({0, 2}, spec_k(8)) == 20.0);

  auto far = spec_k(8);
  far.max_distance_km = 10.0;
  CHECK_FALSE(s.interpolate({5, 5}, far).has_value());
}

TEST_CASE("property: exactness, maximum principle, normalization and shift invariance") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lon(90.3, 90.5), lat(23.6, 23.9), val(0.0, 1.0),
      shift(-5.0, 5.0), power(0.5, 4.0);
  std::uniform_int_distribution<int> n_dist(1, 30), k_dist(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    std::vector<LonLat> sites;
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      sites.push_back({lon(rng), lat(rng)});
      values.push_back(val(rng));
    }
    const double c = shift(rng);
    std::vector<double> shifted(values);
    for (auto& v : shifted) v += c;
    const IdwSampler a(sites, values), b(sites, shifted);
    const auto g = spec_k(static_cast<std::size_t>(k_dist(rng)), power(rng));

    const std::size_t t = static_cast<std::size_t>(trial) % sites.size();
    REQUIRE(*a.interpolate(sites[t], g) == values[t]);

    for (int q = 0; q < 5; ++q) {
      const LonLat p{lon(rng), lat(rng)};
      const auto w = a.weights(p, g);
      REQUIRE_FALSE(w.empty());
      double sum = 0.0, lo = 1e300, hi = -1e300;
      for (const auto& [site, weight] : w) {
        REQUIRE(std::isfinite(weight));
        REQUIRE(weight >= 0.0);
        sum += weight;
        lo = std::min(lo, values[site]);
        hi = std::max(hi, values[site]);
      }
      REQUIRE(std::abs(sum - 1.0) <= 1e-12);
      const double v = *a.interpolate(p, g);
      REQUIRE(v >= lo);
      REQUIRE(v <= hi);
      REQUIRE(*b.interpolate(p, g) == doctest::Approx(v + c).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("tower aggregation") {
  const std::vector<ingest::Tower> towers{{"T1", 90.4, 23.7, "D"}, {"T2", 90.41, 23.71, "D"},
                                          {"T3", 90.42, 23.72, "D"}};
  std::map<std::string, double> pred{{"a", 0.2}, {"b", 0.4}, {"c", 0.6}, {"d", 0.9}};
  std::map<std::string, bool> actual{{"e", false}, {"f", false}, {"g", false}};
  std::map<std::string, std::string> homes{{"a", "T1"}, {"b", "T1"}, {"c", "T1"}, {"d", "T2"},
                                           {"e", "T3"}, {"f", "T3"}, {"g", "T3"}};
  const auto est = aggregate_towers(pred, actual, homes, towers, 3);
  REQUIRE(est.size() == 3);
  CHECK(*est[0].predicted_rate == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_FALSE(est[1].predicted_rate.has_value());
  CHECK(*est[2].actual_rate == 0.0);
  std::size_t total = 0;
  for (const auto& e : est) total += e.subscriber_count;
  CHECK(total == 7);

  const auto strict = aggregate_towers(pred, actual, homes, towers, 5);
  CHECK_FALSE(strict[0].predicted_rate.has_value());

  homes["a"] = "T404";
  CHECK_THROWS_AS(aggregate_towers(pred, actual, homes, towers, 3), DataError);
}

TEST_CASE("surface export") {
  const auto s = tiny_surface({0.1, std::nullopt, 0.3, 0.4}, 2);
  std::ostringstream a, b;
  export_surface(a, s, ExportFormat::kGeoJson);
  export_surface(b, s, ExportFormat::kGeoJson);
  CHECK(a.str() == b.str());
  const auto doc = nlohmann::json::parse(a.str());
  REQUIRE(doc["features"].size() == 4);
  const auto& missing = doc["features"][1]["properties"];
  CHECK(missing["no_data"] == true);
  CHECK_FALSE(missing.contains("rate"));
  CHECK(doc["features"][0]["properties"]["rate"].get<double>() == 0.1);

  std::ostringstream csv;
  export_surface(csv, s, ExportFormat::kCsv);
  const std::string text = csv.str();
  CHECK(text.rfind("lon_center,lat_center,rate\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("surface comparison and pockets") {
  const auto a = tiny_surface({0.1, 0.2, 0.3, 0.4}, 2);
  const auto same = compare_surfaces(a, a);
  CHECK(same.mean_abs_error == 0.0);
  CHECK(*same.correlation == doctest::Approx(1.0));
  const auto flat = tiny_surface({0.5, 0.5, 0.5, 0.5}, 2);
  CHECK_FALSE(compare_surfaces(a, flat).correlation.has_value());
  auto other = a;
  other.spec.cell_size = 2;
  CHECK_THROWS_AS(compare_surfaces(a, other), ConfigError);

  const auto pockets = tiny_surface({9, 0, 0, 9, 9, 0, 0, 9, 0, 0, 0, 0}, 4);
  const auto comps = high_value_components(pockets, 80.0);
  CHECK(comps.size() == 2);
}

TEST_CASE("grid interpolation is thread-count independent") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lon(90.3, 90.5), lat(23.6, 23.9), val(0, 1);
  std::vector<ingest::Tower> towers;
  std::vector<LonLat> sites;
  std::vector<double> values;
  for (int i = 0; i < 40; ++i) {
    towers.push_back({"T" + std::to_string(i), lon(rng), lat(rng), "D"});
    sites.push_back({towers.back().longitude, towers.back().latitude});
    values.push_back(val(rng));
  }
  const auto g = grid_around(towers, 0.01);
  const auto one = idw_interpolate(sites, values, g, 1);
  const auto many = idw_interpolate(sites, values, g, 4);
  REQUIRE(one.cells.size() == many.cells.size());
  for (std::size_t i = 0; i < one.cells.size(); ++i) CHECK(one.cells[i].value == many.cells[i].value);
  for (const auto& t : towers) {
    CHECK(t.longitude > g.lon_min);
    CHECK(t.latitude < g.lat_max);
  }
}
