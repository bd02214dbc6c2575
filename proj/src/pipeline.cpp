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

#include "litmap/pipeline.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"
#include "litmap/ingest.hpp"
#include "litmap/synth.hpp"

namespace litmap::pipeline {

namespace {

std::size_t non_negative(const KeyValueConfig& kv, const std::string& key, std::size_t fallback) {
  const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

int positive_int(const KeyValueConfig& kv, const std::string& key, int fallback) {
  const auto v = kv.get_int(key, fallback);
  if (v <= 0 || v > std::numeric_limits<int>::max()) throw ConfigError(key + " must be positive");
  return static_cast<int>(v);
}

template <class T>
void collect(const std::string& what, ingest::Parsed<T>& parsed, LoadedBundle& out) {
  if (parsed.stats.errors == 0) return;
  std::string msg = what + ": skipped " + std::to_string(parsed.stats.errors) + " malformed row(s)";
  if (!parsed.stats.error_records.empty())
    msg += "; first at line " + std::to_string(parsed.stats.error_records.front().line) + ": " +
           parsed.stats.error_records.front().message;
  out.warnings.push_back(std::move(msg));
}

}  // namespace

RunSettings RunSettings::from(const KeyValueConfig& kv) {
  RunSettings s;
  if (kv.has("window_start")) {
    const std::string text = kv.get_string("window_start", "");
    auto t = parse_utc(text);
    if (!t) throw ConfigError("window_start '" + text + "' is not YYYY-MM-DDTHH:MM:SSZ");
    s.window.start = *t;
  }
  s.window.days = positive_int(kv, "observation_days", s.window.days);

  s.hp.n_trees = positive_int(kv, "n_trees", s.hp.n_trees);
  s.hp.max_depth = positive_int(kv, "max_depth", s.hp.max_depth);
  s.hp.learning_rate = kv.get_double("learning_rate", s.hp.learning_rate);
  s.hp.min_samples_leaf = positive_int(kv, "min_samples_leaf", s.hp.min_samples_leaf);
  s.hp.subsample = kv.get_double("subsample", s.hp.subsample);
  s.hp.max_bins = positive_int(kv, "max_bins", s.hp.max_bins);
  s.hp.min_category_rows = positive_int(kv, "min_category_rows", s.hp.min_category_rows);
  s.hp.cat_smooth = kv.get_double("cat_smooth", s.hp.cat_smooth);
  s.hp.max_cat_left = positive_int(kv, "max_cat_left", s.hp.max_cat_left);
  if (!(s.hp.cat_smooth >= 0.0)) throw ConfigError("cat_smooth must be non-negative");
  if (!(s.hp.learning_rate > 0.0 && s.hp.learning_rate <= 1.0))
    throw ConfigError("learning_rate must be in (0, 1]");
  if (!(s.hp.subsample > 0.0 && s.hp.subsample <= 1.0))
    throw ConfigError("subsample must be in (0, 1]");
  if (s.hp.max_bins < 2 || s.hp.max_bins > 255) throw ConfigError("max_bins must be in [2, 255]");

  s.train_fraction = kv.get_double("train_fraction", s.train_fraction);
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  s.threshold = kv.get_double("threshold", s.threshold);
  if (!(s.threshold >= 0.0 && s.threshold <= 1.0)) throw ConfigError("threshold must be in [0, 1]");
  s.folds = non_negative(kv, "folds", s.folds);
  if (s.folds == 1) throw ConfigError("folds must be 0 or at least 2");

  s.gcv.elimination_trees = positive_int(kv, "gcv_trees", s.gcv.elimination_trees);
  s.gcv.penalty = kv.get_double("gcv_penalty", s.gcv.penalty);
  s.gcv.tolerance = kv.get_double("gcv_tolerance", s.gcv.tolerance);
  s.gcv.upsample = kv.get_bool("gcv_upsample", s.gcv.upsample);
  if (!(s.gcv.penalty >= 0.0)) throw ConfigError("gcv_penalty must be non-negative");
  if (!(s.gcv.tolerance >= 0.0)) throw ConfigError("gcv_tolerance must be non-negative");

  s.cell_size = kv.get_double("cell_size", s.cell_size);
  s.idw_power = kv.get_double("idw_power", s.idw_power);
  s.idw_k = non_negative(kv, "idw_k", s.idw_k);
  s.idw_max_distance_km = kv.get_double("idw_max_distance_km", s.idw_max_distance_km);
  s.min_count = non_negative(kv, "min_count", s.min_count);
  if (!(s.cell_size > 0.0)) throw ConfigError("cell_size must be positive");
  if (s.idw_k == 0) throw ConfigError("idw_k must be positive");
  return s;
}

std::vector<std::pair<std::string, std::string>> documented_run_keys() {
  const RunSettings d;
  auto f = [](double v) { return csv::format_double(v); };
  return {
      {"window_start", format_utc(d.window.start)},
      {"observation_days", std::to_string(d.window.days)},
      {"n_trees", std::to_string(d.hp.n_trees)},
      {"max_depth", std::to_string(d.hp.max_depth)},
      {"learning_rate", f(d.hp.learning_rate)},
      {"min_samples_leaf", std::to_string(d.hp.min_samples_leaf)},
      {"subsample", f(d.hp.subsample)},
      {"max_bins", std::to_string(d.hp.max_bins)},
      {"min_category_rows", std::to_string(d.hp.min_category_rows)},
      {"cat_smooth", f(d.hp.cat_smooth)},
      {"max_cat_left", std::to_string(d.hp.max_cat_left)},
      {"train_fraction", f(d.train_fraction)},
      {"threshold", f(d.threshold)},
      {"folds", std::to_string(d.folds)},
      {"gcv_trees", std::to_string(d.gcv.elimination_trees)},
      {"gcv_penalty", f(d.gcv.penalty)},
      {"gcv_tolerance", f(d.gcv.tolerance)},
      {"gcv_upsample", d.gcv.upsample ? "true" : "false"},
      {"cell_size", f(d.cell_size)},
      {"idw_power", f(d.idw_power)},
      {"idw_k", std::to_string(d.idw_k)},
      {"idw_max_distance_km", f(d.idw_max_distance_km)},
      {"min_count", std::to_string(d.min_count)},
  };
}

std::set<std::string> known_config_keys() {
  std::set<std::string> keys;
  for (const auto& [k, v] : documented_run_keys()) keys.insert(k);
  for (const auto& [k, v] : synth::PopulationConfig::documented_keys()) keys.insert(k);
  return keys;
}

std::uint64_t Seeds::split() const { return derive_seed(root, "split"); }
std::uint64_t Seeds::upsample() const { return derive_seed(root, "upsample"); }
std::uint64_t Seeds::train() const { return derive_seed(root, "train"); }
std::uint64_t Seeds::cv() const { return derive_seed(root, "cv"); }
std::uint64_t Seeds::selection() const { return derive_seed(root, "selection"); }

BundlePaths BundlePaths::in_directory(const std::string& dir) {
  const std::string d = dir.empty() || dir.back() == '/' ? dir : dir + "/";
  return {d + "cdr.csv", d + "topups.csv", d + "towers.csv", d + "handsets.csv", d + "labels.csv"};
}

std::map<std::string, std::string> BundlePaths::named() const {
  return {{"cdr", cdr}, {"topups", topups}, {"towers", towers}, {"handsets", handsets},
          {"labels", labels}};
}

LoadedBundle load_bundle(const BundlePaths& paths, const ObservationWindow& window, bool strict) {
  LoadedBundle out;
  ingest::ParseOptions opts;
  opts.strict = strict;

  auto towers = ingest::read_towers(paths.towers, opts);
  auto handsets = ingest::read_handsets(paths.handsets, opts);
  auto labels = ingest::read_labels(paths.labels, opts);
  auto topups = ingest::read_topups(paths.topups, opts);
  auto cdr = ingest::read_cdr(paths.cdr, opts);
  collect("towers", towers, out);
  collect("handsets", handsets, out);
  collect("labels", labels, out);
  collect("topups", topups, out);
  collect("cdr", cdr, out);

  out.report = ingest::validate_bundle(cdr.records, topups.records, towers.records,
                                       handsets.records, labels.records, window);
  const auto& r = out.report;
  if (r.blocking()) {
    std::string list;
    for (std::size_t i = 0; i < r.missing_towers.size() && i < 5; ++i)
      list += (i ? ", " : "") + r.missing_towers[i];
    if (strict)
      throw DataError(std::to_string(r.missing_towers.size()) +
                      " tower id(s) referenced by events are missing from the tower file: " + list);
    std::unordered_set<std::string> known;
    for (const auto& t : towers.records) known.insert(t.tower_id);
    const auto before = cdr.records.size();
    std::erase_if(cdr.records, [&](const ingest::CdrEvent& e) { return !known.count(e.tower_id); });
    out.dropped_events = before - cdr.records.size();
    out.warnings.push_back("dropped " + std::to_string(out.dropped_events) +
                           " event(s) on unknown towers: " + list);
  }
  if (!r.unlabeled_subscribers.empty())
    out.warnings.push_back(std::to_string(r.unlabeled_subscribers.size()) +
                           " subscriber(s) with events but no label are ignored");
  if (!r.zero_event_subscribers.empty())
    out.warnings.push_back(std::to_string(r.zero_event_subscribers.size()) +
                           " labeled subscriber(s) have no events");
  if (r.out_of_window_events)
    out.warnings.push_back(std::to_string(r.out_of_window_events) +
                           " record(s) outside the observation window are ignored");

  out.bundle.events = std::move(cdr.records);
  out.bundle.topups = std::move(topups.records);
  out.bundle.towers = std::move(towers.records);
  out.bundle.handsets = std::move(handsets.records);
  out.bundle.labels = std::move(labels.records);
  return out;
}

TrainOutcome train_and_evaluate(const learn::LabeledSet& data, const RunSettings& s, Seeds seeds,
                                unsigned threads) {
  TrainOutcome out;
  learn::SplitSpec spec{s.train_fraction, true, seeds.split()};
  auto tt = learn::split(data, spec);
  out.split = tt.indices;
  const auto balanced = learn::upsample_minority(tt.train, seeds.upsample());
  out.model = learn::train(balanced, s.hp, seeds.train());
  out.report = learn::evaluate(out.model, tt.test, s.threshold, &tt.train);
  out.importance = learn::split_gain_importance(out.model);
  if (s.folds >= 2)
    out.cv = learn::cross_validate(data, s.folds, s.hp, seeds.cv(), s.threshold, threads);
  return out;
}

MapOutcome build_maps(const learn::GbmModel& model, const learn::LabeledSet& data,
                      const learn::SplitIndices& split,
                      const std::map<std::string, std::string>& home_towers,
                      std::span<const ingest::Tower> towers, const RunSettings& s,
                      unsigned threads) {
  MapOutcome out;
  const auto test = data.subset(split.test);
  const auto probs = model.predict_matrix(test.X);
  std::map<std::string, double> predictions;
  for (std::size_t r = 0; r < test.size(); ++r) predictions[test.X.ids[r]] = probs[r];
  std::map<std::string, bool> actual;
  for (std::size_t r : split.train) actual[data.X.ids[r]] = data.y[r] == 1;

  out.towers = geo::aggregate_towers(predictions, actual, home_towers, towers, s.min_count);
  out.grid = geo::grid_around(towers, s.cell_size);
  out.grid.power = s.idw_power;
  out.grid.k = s.idw_k;
  out.grid.max_distance_km = s.idw_max_distance_km;
  out.grid.validate();
  out.predicted = geo::idw_interpolate(out.towers, geo::RateKind::kPredicted, out.grid, threads);
  out.actual = geo::idw_interpolate(out.towers, geo::RateKind::kActual, out.grid, threads);
  out.comparison = geo::compare_surfaces(out.predicted, out.actual);
  return out;
}

}  // namespace litmap::pipeline
