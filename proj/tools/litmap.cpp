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

// litmap: synthetic data, featurization, training, evaluation, feature
// selection, tower maps and class densities from one entry point.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "litmap/common.hpp"
#include "litmap/csv.hpp"
#include "litmap/density.hpp"
#include "litmap/matrix_io.hpp"
#include "litmap/model_io.hpp"
#include "litmap/pipeline.hpp"
#include "litmap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace litmap;

namespace {

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool strict = false;
};

void note(const std::string& msg) { std::cerr << "litmap: " << msg << '\n'; }

KeyValueConfig load_config(const Globals& g) {
  KeyValueConfig kv = g.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config_path);
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + o + "' is not key=value");
    kv.set(o.substr(0, eq), o.substr(eq + 1));
  }
  kv.reject_unknown(pipeline::known_config_keys());
  return kv;
}

std::uint64_t root_seed(const Globals& g, const KeyValueConfig& kv) {
  if (g.seed) return *g.seed;
  return static_cast<std::uint64_t>(kv.get_int("seed", 42));
}

unsigned worker_count(const Globals& g) {
  if (g.threads > 0) return g.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// "out/x.csv" -> "out/x<suffix>"
std::string sidecar(const std::string& path, const std::string& suffix) {
  const std::string ext = ".csv";
  if (path.size() > ext.size() && path.ends_with(ext))
    return path.substr(0, path.size() - ext.size()) + suffix;
  return path + suffix;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_out(const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

json provenance(std::uint64_t seed, const std::map<std::string, std::string>& inputs) {
  return Provenance::for_inputs(seed, inputs).to_json();
}

learn::LabeledSet load_labeled(const std::string& features_path, const std::string& labels_path,
                               bool strict) {
  auto X = features::read_matrix_files(features_path, features::catalog_path_for(features_path));
  ingest::ParseOptions opts;
  opts.strict = strict;
  auto labels = ingest::read_labels(labels_path, opts);
  return learn::attach_labels(std::move(X), labels.records);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const auto all = load_config(g);
  // One file may drive every stage; the generator only sees its own keys.
  KeyValueConfig kv;
  for (const auto& [k, v] : synth::PopulationConfig::documented_keys())
    if (all.has(k)) kv.set(k, all.entries().at(k));
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  const auto config = synth::PopulationConfig::from(kv);
  const auto manifest = synth::write_dataset(a.out, config, worker_count(g));
  note("wrote " + std::to_string(manifest["files"]["cdr.csv"]["rows"].get<std::size_t>()) +
       " CDR rows for " + std::to_string(config.n_subscribers) + " subscribers to " + a.out);
  return 0;
}

struct FeaturizeArgs {
  std::string data_dir, cdr, topups, towers, handsets, labels, out;
};

int cmd_featurize(const Globals& g, const FeaturizeArgs& a) {
  const auto kv = load_config(g);
  const auto settings = pipeline::RunSettings::from(kv);
  auto paths = pipeline::BundlePaths::in_directory(a.data_dir);
  if (!a.cdr.empty()) paths.cdr = a.cdr;
  if (!a.topups.empty()) paths.topups = a.topups;
  if (!a.towers.empty()) paths.towers = a.towers;
  if (!a.handsets.empty()) paths.handsets = a.handsets;
  if (!a.labels.empty()) paths.labels = a.labels;
  for (const auto& [name, p] : paths.named())
    if (!fs::is_regular_file(p)) throw ConfigError("input '" + name + "' not found: " + p);

  auto loaded = pipeline::load_bundle(paths, settings.window, g.strict);
  for (const auto& w : loaded.warnings) note("warning: " + w);
  const auto result = features::featurize(loaded.bundle, settings.window, worker_count(g));

  {
    auto out = open_out(a.out);
    features::write_matrix_csv(out, result.matrix);
  }
  {
    auto out = open_out(features::catalog_path_for(a.out));
    features::write_catalog_csv(out, result.matrix);
  }
  {
    auto out = open_out(sidecar(a.out, ".home_towers.csv"));
    features::write_home_towers_csv(out, result.home_towers);
  }
  json prov = provenance(root_seed(g, kv), paths.named());
  prov["window"] = {{"start", format_utc(settings.window.start)}, {"days", settings.window.days}};
  prov["rows"] = result.matrix.rows();
  prov["columns"] = result.matrix.cols();
  write_json_file(sidecar(a.out, ".provenance.json"), prov);
  note("featurized " + std::to_string(result.matrix.rows()) + " subscribers x " +
       std::to_string(result.matrix.cols()) + " features");
  return 0;
}

struct TrainArgs {
  std::string features, labels, model, report, importance;
  std::size_t folds = 0;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  auto kv = load_config(g);
  if (a.folds) kv.set("folds", std::to_string(a.folds));
  const auto settings = pipeline::RunSettings::from(kv);
  const pipeline::Seeds seeds{root_seed(g, kv)};
  const auto data = load_labeled(a.features, a.labels, g.strict);
  const auto outcome = pipeline::train_and_evaluate(data, settings, seeds, worker_count(g));

  const auto prov = Provenance::for_inputs(seeds.root, {{"features", a.features}, {"labels", a.labels}});
  ensure_parent(a.model);
  learn::save_model(a.model, outcome.model, prov);

  json report;
  report["provenance"] = prov.to_json();
  report["split"] = {{"train_fraction", settings.train_fraction},
                     {"stratified", true},
                     {"train_rows", outcome.split.train.size()},
                     {"test_rows", outcome.split.test.size()}};
  report["evaluation"] = learn::to_json(outcome.report);
  report["importance"] = learn::to_json(outcome.importance);
  if (outcome.cv) report["cross_validation"] = learn::to_json(*outcome.cv);
  ensure_parent(a.report);
  write_json_file(a.report, report);
  if (!a.importance.empty()) {
    auto out = open_out(a.importance);
    out << "feature,score\n";
    for (const auto& s : outcome.importance) {
      csv::write_field(out, s.feature);
      out << ',' << csv::format_double(s.score) << '\n';
    }
  }
  note("test accuracy " + csv::format_fixed(outcome.report.accuracy, 4) + " on " +
       std::to_string(outcome.split.test.size()) + " held-out subscribers");
  if (outcome.cv)
    note(std::to_string(settings.folds) + "-fold CV mean accuracy " +
         csv::format_fixed(outcome.cv->mean_accuracy, 4));
  return 0;
}

struct EvaluateArgs {
  std::string model, features, labels, out;
  bool all_rows = false;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  const auto kv = load_config(g);
  const auto settings = pipeline::RunSettings::from(kv);
  const pipeline::Seeds seeds{root_seed(g, kv)};
  const auto model = learn::load_model(a.model);
  const auto data = load_labeled(a.features, a.labels, g.strict);

  learn::EvalReport report;
  std::size_t rows = data.size();
  if (a.all_rows) {
    report = learn::evaluate(model, data, settings.threshold);
  } else {
    const auto tt = learn::split(data, {settings.train_fraction, true, seeds.split()});
    report = learn::evaluate(model, tt.test, settings.threshold, &tt.train);
    rows = tt.test.size();
  }
  json doc;
  doc["provenance"] =
      provenance(seeds.root, {{"model", a.model}, {"features", a.features}, {"labels", a.labels}});
  doc["scope"] = a.all_rows ? "all" : "test";
  doc["evaluation"] = learn::to_json(report);
  ensure_parent(a.out);
  write_json_file(a.out, doc);
  note("accuracy " + csv::format_fixed(report.accuracy, 4) + " on " + std::to_string(rows) + " rows");
  return 0;
}

struct SelectArgs {
  std::string features, labels, out;
};

int cmd_select(const Globals& g, const SelectArgs& a) {
  const auto kv = load_config(g);
  auto settings = pipeline::RunSettings::from(kv);
  settings.gcv.threads = worker_count(g);
  const pipeline::Seeds seeds{root_seed(g, kv)};
  const auto data = load_labeled(a.features, a.labels, g.strict);
  const auto tt = learn::split(data, {settings.train_fraction, true, seeds.split()});
  const auto result = learn::gcv_backward_eliminate(
      tt.train, settings.hp, seeds.selection(), settings.gcv, [](const learn::EliminationStep& s) {
        note("removed " + s.feature + " (GCV " + csv::format_double(s.gcv_after) + ")");
        return true;
      });
  json doc;
  doc["provenance"] = provenance(seeds.root, {{"features", a.features}, {"labels", a.labels}});
  doc["options"] = {{"elimination_trees", settings.gcv.elimination_trees},
                    {"penalty", settings.gcv.penalty},
                    {"tolerance", settings.gcv.tolerance},
                    {"upsample", settings.gcv.upsample}};
  doc["selection"] = learn::to_json(result);
  ensure_parent(a.out);
  write_json_file(a.out, doc);
  note("kept " + std::to_string(result.selected.size()) + " of " + std::to_string(data.X.cols()) +
       " features");
  return 0;
}

struct MapArgs {
  std::string model, features, labels, towers, home_towers, out_dir, format = "geojson";
};

int cmd_map(const Globals& g, const MapArgs& a) {
  const auto kv = load_config(g);
  const auto settings = pipeline::RunSettings::from(kv);
  const pipeline::Seeds seeds{root_seed(g, kv)};
  const auto model = learn::load_model(a.model);
  const auto data = load_labeled(a.features, a.labels, g.strict);
  const std::string homes_path =
      a.home_towers.empty() ? sidecar(a.features, ".home_towers.csv") : a.home_towers;
  if (!fs::is_regular_file(homes_path)) throw ConfigError("home tower file not found: " + homes_path);
  const auto homes = features::read_home_towers(homes_path);
  ingest::ParseOptions opts;
  opts.strict = g.strict;
  const auto towers = ingest::read_towers(a.towers, opts).records;

  // Fails with a data error if the model's catalog does not match the matrix.
  (void)model.column_map(data.X);
  const auto split = learn::split(data.y, {settings.train_fraction, true, seeds.split()});
  const auto maps = pipeline::build_maps(model, data, split, homes, towers, settings, worker_count(g));

  const json prov = provenance(seeds.root, {{"model", a.model},
                                            {"features", a.features},
                                            {"labels", a.labels},
                                            {"towers", a.towers},
                                            {"home_towers", homes_path}});
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  const bool as_csv = a.format == "csv";
  const auto fmt = as_csv ? geo::ExportFormat::kCsv : geo::ExportFormat::kGeoJson;
  const std::string ext = as_csv ? ".csv" : ".geojson";
  const std::string embedded = as_csv ? std::string{} : prov.dump();
  geo::export_surface_file((dir / ("predicted" + ext)).string(), maps.predicted, fmt, embedded);
  geo::export_surface_file((dir / ("actual" + ext)).string(), maps.actual, fmt, embedded);

  {
    auto out = open_out((dir / "towers.csv").string());
    out << "tower_id,longitude,latitude,subscriber_count,predicted_count,predicted_rate,"
           "actual_count,actual_rate\n";
    for (const auto& t : maps.towers) {
      csv::write_field(out, t.tower_id);
      out << ',' << csv::format_double(t.longitude) << ',' << csv::format_double(t.latitude) << ','
          << t.subscriber_count << ',' << t.predicted_count << ',';
      if (t.predicted_rate) out << csv::format_double(*t.predicted_rate);
      out << ',' << t.actual_count << ',';
      if (t.actual_rate) out << csv::format_double(*t.actual_rate);
      out << '\n';
    }
  }
  json cmp;
  cmp["provenance"] = prov;
  cmp["grid"] = {{"lon_min", maps.grid.lon_min}, {"lat_min", maps.grid.lat_min},
                 {"lon_max", maps.grid.lon_max}, {"lat_max", maps.grid.lat_max},
                 {"cell_size", maps.grid.cell_size}, {"nx", maps.predicted.nx},
                 {"ny", maps.predicted.ny}, {"power", maps.grid.power}, {"k", maps.grid.k},
                 {"max_distance_km", maps.grid.max_distance_km}};
  cmp["min_count"] = settings.min_count;
  cmp["valid_cells"] = maps.comparison.valid_cells;
  cmp["mean_abs_error"] = maps.comparison.mean_abs_error;
  cmp["p90_abs_error"] = maps.comparison.p90_abs_error;
  cmp["correlation"] = maps.comparison.correlation ? json(*maps.comparison.correlation) : json(nullptr);
  write_json_file((dir / "comparison.json").string(), cmp);
  if (as_csv) write_json_file((dir / "provenance.json").string(), prov);
  note("surfaces " + std::to_string(maps.predicted.nx) + "x" + std::to_string(maps.predicted.ny) +
       ", correlation " +
       (maps.comparison.correlation ? csv::format_fixed(*maps.comparison.correlation, 4)
                                    : std::string("undefined")));
  return 0;
}

struct DensityArgs {
  std::string features, labels, feature, out;
  std::size_t bins = 20;
  bool log = false;
};

int cmd_density(const Globals& g, const DensityArgs& a) {
  const auto kv = load_config(g);
  const pipeline::Seeds seeds{root_seed(g, kv)};
  const auto data = load_labeled(a.features, a.labels, g.strict);
  // std::vector<bool> cannot back a span.
  auto ill = std::make_unique<bool[]>(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) ill[r] = data.y[r] == 1;
  const auto d = features::feature_density(data.X, {ill.get(), data.size()}, a.feature, a.bins, a.log);

  auto out = open_out(a.out);
  out << "bin_lo,bin_hi,illiterate,literate\n";
  for (std::size_t b = 0; b + 1 < d.edges.size(); ++b)
    out << csv::format_double(d.edges[b]) << ',' << csv::format_double(d.edges[b + 1]) << ','
        << csv::format_double(d.illiterate[b]) << ',' << csv::format_double(d.literate[b]) << '\n';
  json prov = provenance(seeds.root, {{"features", a.features}, {"labels", a.labels}});
  prov["feature"] = d.feature;
  prov["log_transformed"] = d.log_transformed;
  prov["illiterate_n"] = d.illiterate_n;
  prov["literate_n"] = d.literate_n;
  prov["illiterate_mean_bin"] = features::ClassDensity::mean_bin(d.illiterate);
  prov["literate_mean_bin"] = features::ClassDensity::mean_bin(d.literate);
  write_json_file(sidecar(a.out, ".provenance.json"), prov);
  note(d.feature + ": mean bin illiterate " +
       csv::format_fixed(features::ClassDensity::mean_bin(d.illiterate), 2) + ", literate " +
       csv::format_fixed(features::ClassDensity::mean_bin(d.literate), 2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"litmap: illiteracy mapping from mobile phone metadata"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "config override key=value (repeatable; wins over --config)");
  app.add_option("--seed", g.seed, "root seed (overrides the config 'seed' key)");
  app.add_option("--threads", g.threads, "worker threads; 0 = all cores")->default_val(1);
  app.add_flag("--strict", g.strict, "abort on the first malformed row or unresolved tower");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic population and its logs");
  synth->add_option("--out", synth_args.out, "output directory")->required();

  FeaturizeArgs fa;
  auto* featurize = app.add_subcommand("featurize", "build the subscriber feature matrix");
  featurize->add_option("--data", fa.data_dir, "directory holding the five input CSVs");
  featurize->add_option("--cdr", fa.cdr, "CDR CSV (overrides --data)");
  featurize->add_option("--topups", fa.topups, "top-up CSV");
  featurize->add_option("--towers", fa.towers, "tower CSV");
  featurize->add_option("--handsets", fa.handsets, "handset CSV");
  featurize->add_option("--labels", fa.labels, "label CSV");
  featurize->add_option("--out", fa.out, "feature matrix CSV")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "split, up-sample, train and evaluate");
  train->add_option("--features", ta.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--labels", ta.labels, "label CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--model", ta.model, "model JSON to write")->required();
  train->add_option("--report", ta.report, "evaluation report JSON to write")->required();
  train->add_option("--importance", ta.importance, "optional split-gain importance CSV");
  train->add_option("--folds", ta.folds, "also run stratified k-fold cross-validation");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model");
  evaluate->add_option("--model", ea.model, "model JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--features", ea.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--labels", ea.labels, "label CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", ea.out, "report JSON to write")->required();
  evaluate->add_flag("--all", ea.all_rows, "score every row instead of the held-out split");

  SelectArgs sa;
  auto* select = app.add_subcommand("select-features", "GCV backward feature elimination");
  select->add_option("--features", sa.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--labels", sa.labels, "label CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--out", sa.out, "selection JSON to write")->required();

  MapArgs ma;
  auto* map = app.add_subcommand("map", "tower aggregation and IDW surfaces");
  map->add_option("--model", ma.model, "model JSON")->required()->check(CLI::ExistingFile);
  map->add_option("--features", ma.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
  map->add_option("--labels", ma.labels, "label CSV")->required()->check(CLI::ExistingFile);
  map->add_option("--towers", ma.towers, "tower CSV")->required()->check(CLI::ExistingFile);
  map->add_option("--home-towers", ma.home_towers, "home tower CSV (default: featurize sidecar)");
  map->add_option("--out", ma.out_dir, "output directory")->required();
  map->add_option("--format", ma.format, "surface format")
      ->check(CLI::IsMember({"geojson", "csv"}))
      ->default_val("geojson");

  DensityArgs da;
  auto* density = app.add_subcommand("density", "per-class histogram of one feature");
  density->add_option("--features", da.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
  density->add_option("--labels", da.labels, "label CSV")->required()->check(CLI::ExistingFile);
  density->add_option("--feature", da.feature, "feature name")->required();
  density->add_option("--bins", da.bins, "number of bins")->default_val(20);
  density->add_flag("--log", da.log, "natural log of strictly positive values");
  density->add_option("--out", da.out, "histogram CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) return cmd_synth(g, synth_args);
    if (*featurize) return cmd_featurize(g, fa);
    if (*train) return cmd_train(g, ta);
    if (*evaluate) return cmd_evaluate(g, ea);
    if (*select) return cmd_select(g, sa);
    if (*map) return cmd_map(g, ma);
    if (*density) return cmd_density(g, da);
  } catch (const ConfigError& e) {
    note("config error: " + std::string(e.what()));
    return 1;
  } catch (const DataError& e) {
    note("data error: " + std::string(e.what()));
    return 2;
  } catch (const fs::filesystem_error& e) {
    note("data error: " + std::string(e.what()));
    return 2;
  } catch (const InvariantError& e) {
    note("internal error: " + std::string(e.what()));
    return 3;
  } catch (const std::exception& e) {
    note("internal error: " + std::string(e.what()));
    return 3;
  }
  return 1;
}
