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

#include <array>
#include <span>

namespace litmap::geo {

/// Mean Earth radius (IUGG R1 for WGS84), km.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

using Vec3 = std::array<double, 3>;

double haversine_km(LonLat a, LonLat b);
Vec3 to_unit(LonLat p);
LonLat from_vector(const Vec3& v);

/// Great-circle distance from the straight-line chord between two unit vectors.
double chord_to_km(double chord_sq);

/// Weighted centroid on the sphere: normalized weighted mean of unit vectors.
/// Weights must be non-negative with a positive sum.
LonLat spherical_centroid(std::span<const LonLat> points, std::span<const double> weights);

}  // namespace litmap::geo
