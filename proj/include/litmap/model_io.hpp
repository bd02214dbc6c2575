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
// JSON documents: model files, evaluation reports, provenance blocks.

#include <map>
#include <string>

#include "json.hpp"

#include "litmap/evaluation.hpp"
#include "litmap/gbm.hpp"
#include "litmap/selection.hpp"

namespace litmap {

inline constexpr int kModelFormatVersion = 1;

/// Tool version, root seed and input file digests embedded in every artifact.
struct Provenance {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // path -> digest

  nlohmann::json to_json() const;
  static Provenance for_inputs(std::uint64_t seed, const std::map<std::string, std::string>& paths);
};

namespace learn {

nlohmann::json to_json(const GbmModel& model);
GbmModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const CvResult& cv);
nlohmann::json to_json(const GcvResult& g);
nlohmann::json to_json(const std::vector<FeatureScore>& scores);

void save_model(const std::string& path, const GbmModel& model, const Provenance& prov);
GbmModel load_model(const std::string& path);

}  // namespace learn

/// Pretty-printed, newline-terminated; throws DataError if unwritable.
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace litmap
