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

#include "litmap/model_io.hpp"

#include <fstream>

#include "litmap/common.hpp"

namespace litmap {

using nlohmann::json;

json Provenance::to_json() const {
  json inputs_doc = json::object();
  for (const auto& [path, digest] : inputs) inputs_doc[path] = digest;
  return {{"tool", "litmap"}, {"tool_version", kToolVersion}, {"seed", seed}, {"inputs", inputs_doc}};
}

Provenance Provenance::for_inputs(std::uint64_t seed,
                                  const std::map<std::string, std::string>& paths) {
  Provenance p;
  p.seed = seed;
  for (const auto& [name, path] : paths) p.inputs[name] = file_digest(path);
  return p;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace learn {
namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json node_json(const TreeNode& n) {
  if (n.is_leaf()) return {{"leaf", n.value}, {"samples", n.samples}};
  json j = {{"feature", n.feature},
            {"missing_left", n.missing_left},
            {"left", n.left},
            {"right", n.right},
            {"gain", n.gain},
            {"samples", n.samples},
            {"value", n.value}};
  if (n.categorical)
    j["categories"] = n.left_categories;
  else
    j["threshold"] = n.threshold;
  return j;
}

TreeNode node_from(const json& j) {
  TreeNode n;
  n.samples = j.at("samples").get<std::int32_t>();
  if (j.contains("leaf")) {
    n.value = j.at("leaf").get<double>();
    return n;
  }
  n.feature = j.at("feature").get<std::int32_t>();
  n.missing_left = j.at("missing_left").get<bool>();
  n.left = j.at("left").get<std::int32_t>();
  n.right = j.at("right").get<std::int32_t>();
  n.gain = j.at("gain").get<double>();
  n.value = j.at("value").get<double>();
  if (j.contains("categories")) {
    n.categorical = true;
    n.left_categories = j.at("categories").get<std::vector<double>>();
  } else {
    n.threshold = j.at("threshold").get<double>();
  }
  return n;
}

}  // namespace

json to_json(const GbmModel& m) {
  json feats = json::array();
  for (const auto& f : m.features)
    feats.push_back({{"name", f.name},
                     {"family", features::to_token(f.family)},
                     {"kind", features::to_token(f.kind)}});
  const auto& hp = m.hyperparameters;
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back(node_json(n));
    trees.push_back(std::move(nodes));
  }
  return {{"format", "litmap-gbm"},
          {"format_version", kModelFormatVersion},
          {"catalog_version", m.catalog_version},
          {"features", feats},
          {"hyperparameters",
           {{"n_trees", hp.n_trees},
            {"max_depth", hp.max_depth},
            {"learning_rate", hp.learning_rate},
            {"min_samples_leaf", hp.min_samples_leaf},
            {"subsample", hp.subsample},
            {"max_bins", hp.max_bins},
            {"min_category_rows", hp.min_category_rows},
            {"cat_smooth", hp.cat_smooth},
            {"max_cat_left", hp.max_cat_left}}},
          {"initial_score", m.initial_score},
          {"learning_rate", m.learning_rate},
          {"seed", m.seed},
          {"trees", trees}};
}

GbmModel model_from_json(const json& doc) {
  try {
    if (doc.at("format") != "litmap-gbm") throw DataError("not a litmap model document");
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format_version");
    GbmModel m;
    m.catalog_version = doc.at("catalog_version").get<std::string>();
    for (const auto& f : doc.at("features")) {
      const auto family = features::parse_family(f.at("family").get<std::string>());
      const auto kind = features::parse_kind(f.at("kind").get<std::string>());
      if (!family || !kind) throw DataError("bad feature family/kind in model");
      m.features.push_back({f.at("name").get<std::string>(), *family, *kind});
    }
    const auto& hp = doc.at("hyperparameters");
    m.hyperparameters.n_trees = hp.at("n_trees").get<int>();
    m.hyperparameters.max_depth = hp.at("max_depth").get<int>();
    m.hyperparameters.learning_rate = hp.at("learning_rate").get<double>();
    m.hyperparameters.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
    m.hyperparameters.subsample = hp.at("subsample").get<double>();
    m.hyperparameters.max_bins = hp.at("max_bins").get<int>();
    m.hyperparameters.min_category_rows = hp.at("min_category_rows").get<int>();
    m.hyperparameters.cat_smooth = hp.at("cat_smooth").get<double>();
    m.hyperparameters.max_cat_left = hp.at("max_cat_left").get<int>();
    m.initial_score = doc.at("initial_score").get<double>();
    m.learning_rate = doc.at("learning_rate").get<double>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("trees")) {
      Tree tree;
      for (const auto& n : t) tree.nodes.push_back(node_from(n));
      for (const auto& n : tree.nodes) {
        if (n.is_leaf()) continue;
        const auto size = static_cast<std::int32_t>(tree.nodes.size());
        if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size ||
            n.feature >= static_cast<std::int32_t>(m.features.size()))
          throw DataError("model tree has out-of-range node references");
      }
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

json to_json(const EvalReport& r) {
  return {{"confusion_matrix", {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"tn", r.cm.tn}, {"fn", r.cm.fn}}},
          {"threshold", r.threshold},
          {"test_size", r.cm.total()},
          {"accuracy", r.accuracy},
          {"accuracy_ci95", {{"method", "wilson"}, {"lo", r.accuracy_ci.lo}, {"hi", r.accuracy_ci.hi}}},
          {"sensitivity", optional_json(r.sensitivity)},
          {"specificity", optional_json(r.specificity)},
          {"precision", optional_json(r.precision)},
          {"prevalence", r.prevalence},
          {"lift", optional_json(r.lift)},
          {"train_accuracy", optional_json(r.train_accuracy)},
          {"train_test_gap", optional_json(r.train_test_gap)}};
}

json to_json(const CvResult& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds) folds.push_back(to_json(f));
  return {{"k", cv.folds.size()},
          {"mean_accuracy", cv.mean_accuracy},
          {"std_accuracy", cv.std_accuracy},
          {"mean_sensitivity", cv.mean_sensitivity},
          {"mean_specificity", cv.mean_specificity},
          {"folds", folds}};
}

json to_json(const GcvResult& g) {
  json trace = json::array();
  for (const auto& s : g.trace)
    trace.push_back({{"feature", s.feature},
                     {"gcv_before", s.gcv_before},
                     {"gcv_after", s.gcv_after},
                     {"increase", s.increase()}});
  json scores = json::array();
  for (const auto& [name, v] : g.scores) scores.push_back({{"feature", name}, {"gcv_increase", v}});
  return {{"selected", g.selected}, {"final_gcv", g.final_gcv}, {"trace", trace}, {"scores", scores}};
}

json to_json(const std::vector<FeatureScore>& scores) {
  json out = json::array();
  for (const auto& s : scores) out.push_back({{"feature", s.feature}, {"score", s.score}});
  return out;
}

void save_model(const std::string& path, const GbmModel& model, const Provenance& prov) {
  auto doc = to_json(model);
  doc["provenance"] = prov.to_json();
  write_json_file(path, doc);
}

GbmModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

}  // namespace learn
}  // namespace litmap
