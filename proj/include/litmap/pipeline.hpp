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
// Stage orchestration shared by the command-line tool and the benchmark suite:
// run settings from a flat config, seed derivation, bundle loading, and the
// split -> upsample -> train -> evaluate -> map sequence.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "litmap/config.hpp"
#include "litmap/evaluation.hpp"
#include "litmap/features.hpp"
#include "litmap/geomap.hpp"
#include "litmap/selection.hpp"
#include "litmap/timeutil.hpp"

namespace litmap::pipeline {

struct RunSettings {
  ObservationWindow window{1451865600, 90};
  learn::Hyperparameters hp;
  double train_fraction = 0.75;
  double threshold = 0.5;
  std::size_t folds = 0;  // 0 = no cross-validation
  learn::GcvOptions gcv;
  double cell_size = 0.005;
  double idw_power = 2.0;
  std::size_t idw_k = 8;
  double idw_max_distance_km = 0.0;
  std::size_t min_count = 5;

  static RunSettings from(const KeyValueConfig& kv);
};

/// Keys understood by any stage, so one file can drive the whole pipeline.
std::set<std::string> known_config_keys();
/// Pipeline keys with defaults, for documentation.
std::vector<std::pair<std::string, std::string>> documented_run_keys();

/// Sub-seeds derived from the root by label, so stages do not perturb each other.
struct Seeds {
  std::uint64_t root = 42;
  std::uint64_t split() const;
  std::uint64_t upsample() const;
  std::uint64_t train() const;
  std::uint64_t cv() const;
  std::uint64_t selection() const;
};

struct BundlePaths {
  std::string cdr, topups, towers, handsets, labels;
  static BundlePaths in_directory(const std::string& dir);
  std::map<std::string, std::string> named() const;
};

struct LoadedBundle {
  features::Bundle bundle;
  ingest::ValidationReport report;
  std::size_t dropped_events = 0;  // events on unresolved towers (lenient mode)
  std::vector<std::string> warnings;
};

/// Strict: any malformed row or unresolved tower is a DataError. Lenient:
/// malformed rows are skipped and events on unknown towers dropped, each with
/// a warning.
LoadedBundle load_bundle(const BundlePaths& paths, const ObservationWindow& window, bool strict);

struct TrainOutcome {
  learn::SplitIndices split;
  learn::GbmModel model;
  learn::EvalReport report;
  std::optional<learn::CvResult> cv;
  std::vector<learn::FeatureScore> importance;
};

/// Stratified split, minority up-sampling of the training part, training and
/// held-out evaluation. Train accuracy is measured on the original training rows.
TrainOutcome train_and_evaluate(const learn::LabeledSet& data, const RunSettings& s, Seeds seeds,
                                unsigned threads = 1);

struct MapOutcome {
  std::vector<geo::TowerEstimate> towers;
  geo::GridSpec grid;
  geo::Surface predicted;
  geo::Surface actual;
  geo::SurfaceComparison comparison;
};

/// Predicted rates come from the held-out rows, actual rates from the
/// training rows' labels, matching the split recorded in `split`.
MapOutcome build_maps(const learn::GbmModel& model, const learn::LabeledSet& data,
                      const learn::SplitIndices& split,
                      const std::map<std::string, std::string>& home_towers,
                      std::span<const ingest::Tower> towers, const RunSettings& s,
                      unsigned threads = 1);

}  // namespace litmap::pipeline
