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
// Feature matrix CSV export: `subscriber_id,<catalog names...>`, empty field =
// missing, plus a sidecar catalog CSV `catalog_version,name,family,kind`.

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "litmap/features.hpp"

namespace litmap::features {

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m);
void write_catalog_csv(std::ostream& out, const FeatureMatrix& m);

/// Reads a matrix plus its catalog sidecar; the header must match the catalog.
FeatureMatrix read_matrix(std::istream& matrix_csv, std::istream& catalog_csv);
FeatureMatrix read_matrix_files(const std::string& matrix_path, const std::string& catalog_path);

/// Conventional sidecar path: "features.csv" -> "features.catalog.csv".
std::string catalog_path_for(const std::string& matrix_path);

void write_home_towers_csv(std::ostream& out, const std::map<std::string, std::string>& homes);
std::map<std::string, std::string> read_home_towers(const std::string& path);

}  // namespace litmap::features
