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

#include "litmap/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace litmap::geo {
namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

double haversine_km(LonLat a, LonLat b) {
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dlat / 2);
  const double s2 = std::sin(dlon / 2);
  const double h = s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Vec3 to_unit(LonLat p) {
  const double lat = p.lat * kDeg;
  const double lon = p.lon * kDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

LonLat from_vector(const Vec3& v) {
  const double hyp = std::hypot(v[0], v[1]);
  return {std::atan2(v[1], v[0]) / kDeg, std::atan2(v[2], hyp) / kDeg};
}

double chord_to_km(double chord_sq) {
  const double half = std::sqrt(std::max(0.0, chord_sq)) / 2.0;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, half));
}

LonLat spherical_centroid(std::span<const LonLat> points, std::span<const double> weights) {
  Vec3 acc{0.0, 0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto u = to_unit(points[i]);
    for (int k = 0; k < 3; ++k) acc[k] += weights[i] * u[k];
    total += weights[i];
  }
  for (auto& c : acc) c /= total;
  return from_vector(acc);
}

}  // namespace litmap::geo
