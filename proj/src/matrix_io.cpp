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

#include "litmap/matrix_io.hpp"

#include <fstream>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"

namespace litmap::features {

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "subscriber_id";
  for (const auto& c : m.columns) {
    out << ',';
    csv::write_field(out, c.name);
  }
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    csv::write_field(out, m.ids[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out << ',';
      if (!m.is_missing(r, c)) out << csv::format_double(m.at(r, c));
    }
    out << '\n';
  }
}

void write_catalog_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "catalog_version,name,family,kind\n";
  for (const auto& c : m.columns) {
    csv::write_field(out, m.catalog_version);
    out << ',';
    csv::write_field(out, c.name);
    out << ',' << to_token(c.family) << ',' << to_token(c.kind) << '\n';
  }
}

FeatureMatrix read_matrix(std::istream& matrix_csv, std::istream& catalog_csv) {
  FeatureMatrix m;
  std::vector<std::string_view> f;
  std::string scratch;
  std::string_view line;

  csv::LineReader cat(catalog_csv);
  if (!cat.next(line) || line != "catalog_version,name,family,kind")
    throw DataError("catalog file: malformed header");
  while (cat.next(line)) {
    if (line.empty()) continue;
    if (!csv::split(line, f, scratch) || f.size() != 4)
      throw DataError("catalog file line " + std::to_string(cat.line_number()) + ": bad row");
    const auto family = parse_family(f[2]);
    const auto kind = parse_kind(f[3]);
    if (!family || !kind)
      throw DataError("catalog file line " + std::to_string(cat.line_number()) +
                      ": bad family/kind");
    if (m.columns.empty())
      m.catalog_version = f[0];
    else if (m.catalog_version != f[0])
      throw DataError("catalog file mixes versions");
    m.columns.push_back({std::string(f[1]), *family, *kind});
  }

  csv::LineReader in(matrix_csv);
  if (!in.next(line) || !csv::split(line, f, scratch) || f.size() != m.cols() + 1 ||
      f[0] != "subscriber_id")
    throw DataError("feature matrix: header does not match catalog");
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (f[c + 1] != m.columns[c].name)
      throw DataError("feature matrix: column " + std::to_string(c + 1) + " is '" +
                      std::string(f[c + 1]) + "', catalog says '" + m.columns[c].name + "'");
  while (in.next(line)) {
    if (line.empty()) continue;
    if (!csv::split(line, f, scratch) || f.size() != m.cols() + 1)
      throw DataError("feature matrix line " + std::to_string(in.line_number()) +
                      ": wrong field count");
    m.ids.emplace_back(f[0]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (f[c + 1].empty()) {
        m.values.push_back(kMissing);
        m.missing.push_back(1);
        continue;
      }
      const auto v = csv::to_double(f[c + 1]);
      if (!v)
        throw DataError("feature matrix line " + std::to_string(in.line_number()) +
                        ": bad number '" + std::string(f[c + 1]) + "'");
      m.values.push_back(*v);
      m.missing.push_back(0);
    }
  }
  return m;
}

FeatureMatrix read_matrix_files(const std::string& matrix_path, const std::string& catalog_path) {
  std::ifstream a(matrix_path);
  if (!a) throw DataError("cannot open " + matrix_path);
  std::ifstream b(catalog_path);
  if (!b) throw DataError("cannot open " + catalog_path);
  return read_matrix(a, b);
}

std::string catalog_path_for(const std::string& matrix_path) {
  const std::string suffix = ".csv";
  if (matrix_path.size() > suffix.size() &&
      matrix_path.compare(matrix_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return matrix_path.substr(0, matrix_path.size() - suffix.size()) + ".catalog.csv";
  return matrix_path + ".catalog.csv";
}

void write_home_towers_csv(std::ostream& out, const std::map<std::string, std::string>& homes) {
  out << "subscriber_id,tower_id\n";
  for (const auto& [s, t] : homes) {
    csv::write_field(out, s);
    out << ',';
    csv::write_field(out, t);
    out << '\n';
  }
}

std::map<std::string, std::string> read_home_towers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  csv::LineReader reader(in);
  std::string_view line;
  if (!reader.next(line) || line != "subscriber_id,tower_id")
    throw DataError(path + ": malformed header");
  std::map<std::string, std::string> out;
  std::vector<std::string_view> f;
  std::string scratch;
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (!csv::split(line, f, scratch) || f.size() != 2)
      throw DataError(path + ": bad row at line " + std::to_string(reader.line_number()));
    out.emplace(std::string(f[0]), std::string(f[1]));
  }
  return out;
}

}  // namespace litmap::features
