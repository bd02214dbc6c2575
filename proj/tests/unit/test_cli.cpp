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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using litmap::testing::TempDir;

namespace {

struct Result {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the tool with `args`; stderr is captured.
Result run(const TempDir& dir, const std::string& args) {
  const std::string err = dir.file("stderr.txt");
  const std::string cmd = std::string("\"") + LITMAP_CLI_PATH + "\" " + args + " > /dev/null 2> \"" + err + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

/// One small dataset plus features and a model, built once for the whole suite.
struct World {
  TempDir dir{"cli"};
  std::string cfg;

  World() {
    cfg = dir.file("run.cfg");
    std::ofstream(cfg) << "# small run\nn_subscribers = 600\nobservation_days = 30\nn_towers = 40\n"
                          "illiterate_prevalence = 0.15\nn_trees = 40\nmin_category_rows = 20\n"
                          "gcv_trees = 5\n";
    const std::string c = " --config \"" + cfg + "\" --seed 7 ";
    require_ok(c + "synth --out " + dir.file("data"));
    require_ok(c + "featurize --data " + dir.file("data") + " --out " + dir.file("f/features.csv"));
    require_ok(c + "train --features " + dir.file("f/features.csv") + " --labels " +
               dir.file("data/labels.csv") + " --model " + dir.file("m/model.json") + " --report " +
               dir.file("m/report.json") + " --importance " + dir.file("m/importance.csv"));
  }
  void require_ok(const std::string& args) {
    const auto r = run(dir, args);
    if (r.code != 0) FAIL("command failed (" << r.code << "): " << args << "\n" << r.err);
  }
  std::string common() const { return " --config \"" + cfg + "\" --seed 7 "; }
};

World& world() {
  static World w;
  return w;
}

}  // namespace

TEST_CASE("synth writes five CSVs and a manifest; reruns are identical") {
  auto& w = world();
  for (const char* f : {"cdr.csv", "topups.csv", "towers.csv", "handsets.csv", "labels.csv",
                        "manifest.json"})
    CHECK(fs::exists(w.dir.file(std::string("data/") + f)));
  w.require_ok(w.common() + "synth --out " + w.dir.file("data2"));
  for (const auto& e : fs::directory_iterator(w.dir.file("data")))
    CHECK_MESSAGE(slurp(e.path()) == slurp(w.dir.file("data2") / e.path().filename()),
                  e.path().filename().string());
}

TEST_CASE("featurize: one row per labeled subscriber, identical on rerun") {
  auto& w = world();
  const auto text = slurp(w.dir.file("f/features.csv"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 601);
  w.require_ok(w.common() + "featurize --data " + w.dir.file("data") + " --out " + w.dir.file("f2/features.csv"));
  CHECK(text == slurp(w.dir.file("f2/features.csv")));
  CHECK(slurp(w.dir.file("f/features.catalog.csv")) == slurp(w.dir.file("f2/features.catalog.csv")));
}

TEST_CASE("train report schema and model determinism") {
  auto& w = world();
  const auto report = nlohmann::json::parse(slurp(w.dir.file("m/report.json")));
  const auto& ev = report["evaluation"];
  for (const char* k : {"accuracy", "accuracy_ci95", "sensitivity", "specificity", "lift", "train_test_gap"})
    CHECK_MESSAGE(ev.contains(k), k);
  CHECK(report["provenance"]["seed"] == 7);
  CHECK_FALSE(report.contains("cross_validation"));

  w.require_ok(w.common() + "train --features " + w.dir.file("f/features.csv") + " --labels " +
               w.dir.file("data/labels.csv") + " --model " + w.dir.file("m2/model.json") +
               " --report " + w.dir.file("m2/report.json") + " --folds 3");
  CHECK(slurp(w.dir.file("m/model.json")) == slurp(w.dir.file("m2/model.json")));
  const auto cv = nlohmann::json::parse(slurp(w.dir.file("m2/report.json")));
  CHECK(cv["cross_validation"]["folds"].size() == 3);
}

TEST_CASE("evaluate, select-features, map and density run") {
  auto& w = world();
  const std::string feats = " --features " + w.dir.file("f/features.csv") + " --labels " + w.dir.file("data/labels.csv");
  w.require_ok(w.common() + "evaluate --model " + w.dir.file("m/model.json") + feats + " --out " + w.dir.file("e/eval.json"));
  w.require_ok(w.common() + "select-features" + feats + " --out " + w.dir.file("s/selection.json"));
  const auto sel = nlohmann::json::parse(slurp(w.dir.file("s/selection.json")));
  CHECK(sel.contains("provenance"));

  w.require_ok(w.common() + "map --model " + w.dir.file("m/model.json") + feats + " --towers " +
               w.dir.file("data/towers.csv") + " --out " + w.dir.file("map"));
  CHECK(fs::exists(w.dir.file("map/predicted.geojson")));
  CHECK(fs::exists(w.dir.file("map/actual.geojson")));
  w.require_ok(w.common() + "map --model " + w.dir.file("m/model.json") + feats + " --towers " +
               w.dir.file("data/towers.csv") + " --out " + w.dir.file("mapcsv") + " --format csv");
  CHECK(fs::exists(w.dir.file("mapcsv/predicted.csv")));
  CHECK(slurp(w.dir.file("map/comparison.json")) == slurp(w.dir.file("mapcsv/comparison.json")));

  w.require_ok(w.common() + "density" + feats + " --feature sms_in_count --bins 10 --log --out " + w.dir.file("d/sms.csv"));
  std::ifstream in(w.dir.file("d/sms.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin_lo,bin_hi,illiterate,literate");
  double si = 0, sl = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string a, b, c, d;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, c, ',');
    std::getline(row, d, ',');
    si += std::stod(c);
    sl += std::stod(d);
  }
  CHECK(si == doctest::Approx(1.0));
  CHECK(sl == doctest::Approx(1.0));
}

TEST_CASE("exit codes") {
  auto& w = world();
  const std::string feats = " --features " + w.dir.file("f/features.csv") + " --labels " + w.dir.file("data/labels.csv");

  SUBCASE("usage errors are 1") {
    CHECK(run(w.dir, "no-such-command").code == 1);
    CHECK(run(w.dir, "train").code == 1);
  }
  SUBCASE("an empty config value names the key") {
    const auto r = run(w.dir, "--set n_subscribers= synth --out " + w.dir.file("x"));
    CHECK(r.code == 1);
    CHECK(r.err.find("n_subscribers") != std::string::npos);
  }
  SUBCASE("an unknown config key is rejected") {
    const auto r = run(w.dir, "--set n_subscriber=5 synth --out " + w.dir.file("x"));
    CHECK(r.code == 1);
    CHECK(r.err.find("n_subscriber") != std::string::npos);
  }
  SUBCASE("unknown density feature lists near matches") {
    const auto r = run(w.dir, w.common() + "density" + feats + " --feature sms_in_cnt --out " + w.dir.file("d/x.csv"));
    CHECK(r.code == 1);
    CHECK(r.err.find("sms_in_count") != std::string::npos);
  }
  SUBCASE("unknown tower in strict mode is a data error") {
    fs::copy(w.dir.file("data"), w.dir.file("broken"), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    std::ofstream(w.dir.file("broken/cdr.csv"), std::ios::app)
        << "S000001,2016-01-05T10:00:00Z,O,SMS,S000002,,,T9999,0.5\n";
    const std::string args = w.common() + "featurize --data " + w.dir.file("broken") + " --out " + w.dir.file("b/features.csv");
    CHECK(run(w.dir, "--strict" + args).code == 2);
    CHECK(run(w.dir, args).code == 0);
  }
  SUBCASE("a model and feature file from different catalogs do not mix") {
    std::string text = slurp(w.dir.file("f/features.catalog.csv"));
    for (std::size_t p = text.find("cdr-features-v1"); p != std::string::npos; p = text.find("cdr-features-v1", p))
      text.replace(p, 15, "cdr-features-v0");
    fs::create_directories(w.dir.file("g"));
    fs::copy_file(w.dir.file("f/features.csv"), w.dir.file("g/features.csv"), fs::copy_options::overwrite_existing);
    std::ofstream(w.dir.file("g/features.catalog.csv"), std::ios::binary) << text;
    const auto r = run(w.dir, w.common() + "map --model " + w.dir.file("m/model.json") + " --features " +
                                  w.dir.file("g/features.csv") + " --labels " + w.dir.file("data/labels.csv") +
                                  " --towers " + w.dir.file("data/towers.csv") + " --home-towers " +
                                  w.dir.file("f/features.home_towers.csv") + " --out " + w.dir.file("gm"));
    CHECK(r.code == 2);
  }
  SUBCASE("a missing input file is reported") {
    CHECK(run(w.dir, w.common() + "featurize --data " + w.dir.file("nowhere") + " --out " + w.dir.file("n.csv")).code != 0);
  }
}
