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

#include "litmap/geomap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"
#include "litmap/kernels.hpp"

namespace litmap::geo {

std::vector<TowerEstimate> aggregate_towers(const std::map<std::string, double>& predictions,
                                            const std::map<std::string, bool>& illiterate,
                                            const std::map<std::string, std::string>& home_towers,
                                            std::span<const ingest::Tower> towers,
                                            std::size_t min_count) {
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<TowerEstimate> out;
  for (const auto& t : towers) {
    slot.emplace(t.tower_id, out.size());
    out.push_back({t.tower_id, t.longitude, t.latitude, std::nullopt, std::nullopt, 0, 0, 0});
  }
  std::vector<double> prob_sum(out.size(), 0.0);
  std::vector<std::size_t> ill_count(out.size(), 0);
  std::vector<std::set<std::string_view>> members(out.size());

  auto tower_of = [&](const std::string& sub) -> std::size_t {
    const auto h = home_towers.find(sub);
    if (h == home_towers.end()) throw DataError("subscriber '" + sub + "' has no home tower");
    const auto s = slot.find(h->second);
    if (s == slot.end())
      throw DataError("home tower '" + h->second + "' of '" + sub + "' is not in the tower file");
    return s->second;
  };
  for (const auto& [sub, p] : predictions) {
    const auto t = tower_of(sub);
    prob_sum[t] += p;
    ++out[t].predicted_count;
    members[t].insert(sub);
  }
  for (const auto& [sub, ill] : illiterate) {
    const auto t = tower_of(sub);
    ill_count[t] += ill ? 1 : 0;
    ++out[t].actual_count;
    members[t].insert(sub);
  }
  for (std::size_t t = 0; t < out.size(); ++t) {
    auto& e = out[t];
    e.subscriber_count = members[t].size();
    if (e.predicted_count > 0 && e.predicted_count >= min_count)
      e.predicted_rate = prob_sum[t] / static_cast<double>(e.predicted_count);
    if (e.actual_count > 0 && e.actual_count >= min_count)
      e.actual_rate = static_cast<double>(ill_count[t]) / static_cast<double>(e.actual_count);
  }
  return out;
}

std::size_t GridSpec::nx() const {
  return static_cast<std::size_t>(std::ceil((lon_max - lon_min) / cell_size - 1e-9));
}
std::size_t GridSpec::ny() const {
  return static_cast<std::size_t>(std::ceil((lat_max - lat_min) / cell_size - 1e-9));
}

void GridSpec::validate() const {
  if (!(lon_max > lon_min) || !(lat_max > lat_min))
    throw ConfigError("grid bounding box is degenerate");
  if (!(cell_size > 0.0)) throw ConfigError("grid cell size must be positive");
  if (!(power > 0.0)) throw ConfigError("IDW power must be positive");
  if (k == 0) throw ConfigError("IDW neighbour count must be positive");
  if (exact_radius_km < 0.0 || max_distance_km < 0.0)
    throw ConfigError("IDW radii must be non-negative");
}

GridSpec grid_around(std::span<const ingest::Tower> towers, double cell_size) {
  if (towers.empty()) throw DataError("no towers to bound a grid");
  GridSpec g;
  g.cell_size = cell_size;
  g.lon_min = g.lon_max = towers.front().longitude;
  g.lat_min = g.lat_max = towers.front().latitude;
  for (const auto& t : towers) {
    g.lon_min = std::min(g.lon_min, t.longitude);
    g.lon_max = std::max(g.lon_max, t.longitude);
    g.lat_min = std::min(g.lat_min, t.latitude);
    g.lat_max = std::max(g.lat_max, t.latitude);
  }
  // Snap outward to whole cells so the grid is stable under tiny coordinate noise.
  g.lon_min = std::floor(g.lon_min / cell_size) * cell_size - cell_size;
  g.lat_min = std::floor(g.lat_min / cell_size) * cell_size - cell_size;
  g.lon_max = std::ceil(g.lon_max / cell_size) * cell_size + cell_size;
  g.lat_max = std::ceil(g.lat_max / cell_size) * cell_size + cell_size;
  return g;
}

IdwSampler::IdwSampler(std::span<const LonLat> sites, std::span<const double> values)
    : sites_(sites.begin(), sites.end()), values_(values.begin(), values.end()) {
  if (sites.size() != values.size()) throw InvariantError("IDW sites/values size mismatch");
  for (const auto& s : sites_) {
    const auto u = to_unit(s);
    x_.push_back(u[0]);
    y_.push_back(u[1]);
    z_.push_back(u[2]);
  }
}

std::vector<IdwSampler::Weight> IdwSampler::weights(LonLat q, const GridSpec& spec) const {
  const std::size_t n = values_.size();
  if (n == 0) return {};
  const auto u = to_unit(q);
  std::vector<double> chord(n);
  kernels::active().chord_sq(u[0], u[1], u[2], x_.data(), y_.data(), z_.data(), chord.data(), n);

  // Chord length is monotone in great-circle distance, so rank by it.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k = std::min(spec.k, n);
  auto closer = [&](std::size_t a, std::size_t b) {
    return chord[a] < chord[b] || (chord[a] == chord[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    closer);

  std::vector<Weight> out;
  std::vector<double> dist;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t s = order[j];
    const double d = haversine_km(q, sites_[s]);
    if (spec.max_distance_km > 0.0 && d > spec.max_distance_km) continue;
    if (d < spec.exact_radius_km) return {{s, 1.0}};
    out.push_back({s, 0.0});
    dist.push_back(d);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].weight = 1.0 / std::pow(dist[j], spec.power);
    total += out[j].weight;
  }
  for (auto& w : out) w.weight /= total;
  return out;
}

std::optional<double> IdwSampler::interpolate(LonLat q, const GridSpec& spec) const {
  const auto w = weights(q, spec);
  if (w.empty()) return std::nullopt;
  double acc = 0.0;
  double lo = values_[w.front().site], hi = lo;
  for (const auto& [s, weight] : w) {
    acc += weight * values_[s];
    lo = std::min(lo, values_[s]);
    hi = std::max(hi, values_[s]);
  }
  // Rounding can step a hair outside the contributing range.
  return std::clamp(acc, lo, hi);
}

Surface idw_interpolate(std::span<const LonLat> sites, std::span<const double> values,
                        const GridSpec& spec, unsigned threads) {
  spec.validate();
  if (sites.empty()) throw DataError("IDW needs at least one tower with a rate");
  const IdwSampler sampler(sites, values);
  Surface s;
  s.spec = spec;
  s.nx = spec.nx();
  s.ny = spec.ny();
  s.cells.resize(s.nx * s.ny);
  parallel_for(s.ny, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < s.nx; ++i) {
      auto& c = s.cells[j * s.nx + i];
      c.lon = spec.lon_min + (static_cast<double>(i) + 0.5) * spec.cell_size;
      c.lat = spec.lat_min + (static_cast<double>(j) + 0.5) * spec.cell_size;
      c.value = sampler.interpolate({c.lon, c.lat}, spec);
    }
  });
  return s;
}

Surface idw_interpolate(std::span<const TowerEstimate> estimates, RateKind kind,
                        const GridSpec& spec, unsigned threads) {
  std::vector<LonLat> sites;
  std::vector<double> values;
  for (const auto& e : estimates) {
    const auto& rate = kind == RateKind::kPredicted ? e.predicted_rate : e.actual_rate;
    if (!rate) continue;
    sites.push_back({e.longitude, e.latitude});
    values.push_back(*rate);
  }
  return idw_interpolate(sites, values, spec, threads);
}

void export_surface(std::ostream& out, const Surface& s, ExportFormat format,
                    const std::string& provenance_json) {
  const double h = s.spec.cell_size / 2.0;
  if (format == ExportFormat::kCsv) {
    out << "lon_center,lat_center,rate\n";
    for (const auto& c : s.cells) {
      out << csv::format_double(c.lon) << ',' << csv::format_double(c.lat) << ',';
      if (c.value) out << csv::format_double(*c.value);
      out << '\n';
    }
    return;
  }
  auto num = [](double v) { return csv::format_double(v); };
  out << "{\"type\":\"FeatureCollection\"";
  if (!provenance_json.empty()) out << ",\"provenance\":" << provenance_json;
  out << ",\"features\":[";
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    const std::string x0 = num(c.lon - h), x1 = num(c.lon + h);
    const std::string y0 = num(c.lat - h), y1 = num(c.lat + h);
    if (i) out << ',';
    out << "\n{\"type\":\"Feature\",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[["
        << x0 << ',' << y0 << "],[" << x1 << ',' << y0 << "],[" << x1 << ',' << y1 << "],["
        << x0 << ',' << y1 << "],[" << x0 << ',' << y0 << "]]]},\"properties\":{";
    if (c.value)
      out << "\"rate\":" << num(*c.value) << ",\"no_data\":false";
    else
      out << "\"no_data\":true";
    out << "}}";
  }
  out << "\n]}\n";
}

void export_surface_file(const std::string& path, const Surface& s, ExportFormat format,
                         const std::string& provenance_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  export_surface(out, s, format, provenance_json);
  if (!out) throw DataError("write failed: " + path);
}

namespace {

double percentile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v.front();
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

SurfaceComparison compare_surfaces(const Surface& a, const Surface& b) {
  if (!(a.spec == b.spec) || a.nx != b.nx || a.ny != b.ny)
    throw ConfigError("surfaces are on different grids");
  SurfaceComparison r;
  std::vector<double> xa, xb, err;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.cells[i].value || !b.cells[i].value) continue;
    xa.push_back(*a.cells[i].value);
    xb.push_back(*b.cells[i].value);
    err.push_back(std::abs(xa.back() - xb.back()));
  }
  r.valid_cells = xa.size();
  if (xa.empty()) return r;
  const double n = static_cast<double>(xa.size());
  r.mean_abs_error = std::accumulate(err.begin(), err.end(), 0.0) / n;
  r.p90_abs_error = percentile_of(err, 90.0);
  const double ma = std::accumulate(xa.begin(), xa.end(), 0.0) / n;
  const double mb = std::accumulate(xb.begin(), xb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    sab += (xa[i] - ma) * (xb[i] - mb);
    saa += (xa[i] - ma) * (xa[i] - ma);
    sbb += (xb[i] - mb) * (xb[i] - mb);
  }
  if (saa > 0.0 && sbb > 0.0) r.correlation = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  return r;
}

std::vector<std::vector<std::size_t>> high_value_components(const Surface& s, double percentile) {
  std::vector<double> vals;
  for (const auto& c : s.cells)
    if (c.value) vals.push_back(*c.value);
  if (vals.empty()) return {};
  const double cut = percentile_of(vals, percentile);
  std::vector<char> hot(s.cells.size(), 0);
  for (std::size_t i = 0; i < s.cells.size(); ++i)
    hot[i] = s.cells[i].value && *s.cells[i].value >= cut;

  std::vector<char> seen(s.cells.size(), 0);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t start = 0; start < s.cells.size(); ++start) {
    if (!hot[start] || seen[start]) continue;
    std::vector<std::size_t> comp, stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      comp.push_back(c);
      const std::size_t i = c % s.nx, j = c / s.nx;
      auto visit = [&](std::size_t ii, std::size_t jj) {
        const auto idx = jj * s.nx + ii;
        if (hot[idx] && !seen[idx]) {
          seen[idx] = 1;
          stack.push_back(idx);
        }
      };
      if (i > 0) visit(i - 1, j);
      if (i + 1 < s.nx) visit(i + 1, j);
      if (j > 0) visit(i, j - 1);
      if (j + 1 < s.ny) visit(i, j + 1);
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace litmap::geo
