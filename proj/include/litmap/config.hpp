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

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace litmap {

/// Flat `key = value` configuration. '#' starts a comment; blank lines ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::string& path);

  /// Command-line overrides win over file entries.
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  const std::string* lookup(const std::string& key) const;
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

}  // namespace litmap
