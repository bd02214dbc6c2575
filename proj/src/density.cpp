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

#include "litmap/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "litmap/common.hpp"

namespace litmap::features {
namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double ClassDensity::mean_bin(std::span<const double> hist) {
  double acc = 0.0;
  for (std::size_t i = 0; i < hist.size(); ++i) acc += static_cast<double>(i) * hist[i];
  return acc;
}

std::vector<std::string> near_matches(const FeatureMatrix& m, std::string_view name,
                                      std::size_t limit) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& c : m.columns) {
    std::size_t d = edit_distance(name, c.name);
    if (c.name.find(name) != std::string::npos) d = std::min<std::size_t>(d, 1);
    scored.emplace_back(d, c.name);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && out.size() < limit; ++i)
    out.push_back(scored[i].second);
  return out;
}

ClassDensity feature_density(const FeatureMatrix& m, std::span<const bool> illiterate,
                             std::string_view feature, std::size_t n_bins, bool log_transform) {
  if (n_bins < 2) throw ConfigError("density needs at least 2 bins");
  const auto col = m.column_index(feature);
  if (!col) {
    std::string msg = "unknown feature '" + std::string(feature) + "'; did you mean:";
    for (const auto& s : near_matches(m, feature)) msg += " " + s;
    throw ConfigError(msg);
  }
  if (illiterate.size() != m.rows()) throw InvariantError("labels not aligned to matrix rows");

  std::vector<std::pair<double, bool>> xs;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.is_missing(r, *col)) continue;
    double v = m.at(r, *col);
    if (log_transform) {
      if (v <= 0.0) continue;
      v = std::log(v);
    }
    xs.emplace_back(v, illiterate[r]);
  }
  if (xs.empty()) throw DataError("feature '" + std::string(feature) + "' has no usable values");

  double lo = xs.front().first, hi = lo;
  for (const auto& [v, _] : xs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }

  ClassDensity d;
  d.feature = std::string(feature);
  d.log_transformed = log_transform;
  d.edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) d.edges[i] = lo + width * static_cast<double>(i);
  d.edges.back() = hi;
  d.illiterate.assign(n_bins, 0.0);
  d.literate.assign(n_bins, 0.0);

  for (const auto& [v, ill] : xs) {
    auto bin = static_cast<std::size_t>((v - lo) / width);
    if (bin >= n_bins) bin = n_bins - 1;
    (ill ? d.illiterate : d.literate)[bin] += 1.0;
    ++(ill ? d.illiterate_n : d.literate_n);
  }
  for (auto& x : d.illiterate) x /= static_cast<double>(std::max<std::size_t>(1, d.illiterate_n));
  for (auto& x : d.literate) x /= static_cast<double>(std::max<std::size_t>(1, d.literate_n));
  return d;
}

}  // namespace litmap::features
