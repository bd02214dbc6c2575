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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litmap/features.hpp"

namespace litmap::features {

/// Per-class normalized histograms of one feature over a shared bin grid.
struct ClassDensity {
  std::string feature;
  bool log_transformed = false;
  std::vector<double> edges;       // n_bins + 1 ascending edges
  std::vector<double> illiterate;  // mass per bin; sums to 1 when the class has values
  std::vector<double> literate;
  std::size_t illiterate_n = 0;
  std::size_t literate_n = 0;

  /// Mass-weighted mean bin index of a histogram.
  static double mean_bin(std::span<const double> hist);
};

/// `illiterate[r]` is the label of matrix row r. With `log_transform`, only
/// strictly positive values enter, as ln(v). Throws ConfigError for an unknown
/// feature (listing near matches) or n_bins < 2; DataError if no usable values.
ClassDensity feature_density(const FeatureMatrix& m, std::span<const bool> illiterate,
                             std::string_view feature, std::size_t n_bins,
                             bool log_transform = false);

/// Catalog names closest to `name` by edit distance (at most `limit`).
std::vector<std::string> near_matches(const FeatureMatrix& m, std::string_view name,
                                      std::size_t limit = 3);

}  // namespace litmap::features
