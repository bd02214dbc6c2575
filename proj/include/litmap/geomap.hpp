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
// Tower-level aggregation of predicted and observed illiteracy, k-nearest
// inverse-distance-weighted surfaces, and map exports.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "litmap/geodesy.hpp"
#include "litmap/ingest.hpp"

namespace litmap::geo {

struct TowerEstimate {
  std::string tower_id;
  double longitude = 0.0;
  double latitude = 0.0;
  std::optional<double> predicted_rate;  // absent when predicted_count < min_count
  std::optional<double> actual_rate;     // absent when actual_count < min_count
  std::size_t subscriber_count = 0;      // distinct subscribers homed here
  std::size_t predicted_count = 0;
  std::size_t actual_count = 0;
};

/// `predictions`: subscriber -> probability of illiteracy (scored subscribers).
/// `illiterate`: subscriber -> ground truth for the subscribers used as actuals.
/// One estimate per tower in tower-file order.
std::vector<TowerEstimate> aggregate_towers(const std::map<std::string, double>& predictions,
                                            const std::map<std::string, bool>& illiterate,
                                            const std::map<std::string, std::string>& home_towers,
                                            std::span<const ingest::Tower> towers,
                                            std::size_t min_count = 5);

struct GridSpec {
  double lon_min = 0.0, lat_min = 0.0, lon_max = 1.0, lat_max = 1.0;
  double cell_size = 0.005;  // degrees
  double power = 2.0;
  std::size_t k = 8;
  double exact_radius_km = 0.001;
  double max_distance_km = 0.0;  // 0 = unlimited

  std::size_t nx() const;
  std::size_t ny() const;
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Box around the towers, padded by one cell on each side.
GridSpec grid_around(std::span<const ingest::Tower> towers, double cell_size);

/// Tower positions and values prepared for repeated nearest-neighbour queries.
class IdwSampler {
 public:
  IdwSampler(std::span<const LonLat> sites, std::span<const double> values);

  struct Weight {
    std::size_t site;
    double weight;  // normalized; weights of one query sum to 1
  };
  /// Empty when no site is within range. A site closer than the exactness
  /// radius takes all the weight.
  std::vector<Weight> weights(LonLat q, const GridSpec& spec) const;
  std::optional<double> interpolate(LonLat q, const GridSpec& spec) const;

  std::size_t size() const { return values_.size(); }

 private:
  std::vector<LonLat> sites_;
  std::vector<double> values_;
  std::vector<double> x_, y_, z_;
};

struct SurfaceCell {
  double lon = 0.0;  // cell centre
  double lat = 0.0;
  std::optional<double> value;  // nullopt = no data
};

struct Surface {
  GridSpec spec;
  std::size_t nx = 0, ny = 0;
  std::vector<SurfaceCell> cells;  // row-major: index = j * nx + i, j along latitude

  const SurfaceCell& at(std::size_t i, std::size_t j) const { return cells[j * nx + i]; }
};

enum class RateKind { kPredicted, kActual };

Surface idw_interpolate(std::span<const TowerEstimate> estimates, RateKind kind,
                        const GridSpec& spec, unsigned threads = 1);
Surface idw_interpolate(std::span<const LonLat> sites, std::span<const double> values,
                        const GridSpec& spec, unsigned threads = 1);

enum class ExportFormat { kGeoJson, kCsv };

/// GeoJSON FeatureCollection of cell polygons, properties {rate, no_data};
/// or CSV `lon_center,lat_center,rate` with an empty rate for no-data cells.
void export_surface(std::ostream& out, const Surface& s, ExportFormat format,
                    const std::string& provenance_json = {});
void export_surface_file(const std::string& path, const Surface& s, ExportFormat format,
                         const std::string& provenance_json = {});

struct SurfaceComparison {
  std::size_t valid_cells = 0;
  double mean_abs_error = 0.0;
  double p90_abs_error = 0.0;
  std::optional<double> correlation;  // undefined when either surface is constant
};

/// Throws ConfigError when the grids differ.
SurfaceComparison compare_surfaces(const Surface& predicted, const Surface& actual);

/// 4-connected components of valid cells at or above the given percentile (0-100) of
/// valid cell values. Each component lists cell indices.
std::vector<std::vector<std::size_t>> high_value_components(const Surface& s, double percentile);

}  // namespace litmap::geo
