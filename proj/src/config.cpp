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

#include "litmap/config.hpp"

#include <fstream>
#include <sstream>

#include "litmap/common.hpp"
#include "litmap/csv.hpp"

namespace litmap {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.entries_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string* KeyValueConfig::lookup(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  if (it->second.empty()) throw ConfigError("config key '" + key + "' has no value");
  return &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = lookup(key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  const auto d = csv::to_double(*v);
  if (!d) throw ConfigError("config key '" + key + "': not a number: " + *v);
  return *d;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  const auto i = csv::to_int(*v);
  if (!i) throw ConfigError("config key '" + key + "': not an integer: " + *v);
  return *i;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true") return true;
  if (*v == "0" || *v == "false") return false;
  throw ConfigError("config key '" + key + "': expected true/false: " + *v);
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::string_view rest(*v);
  while (true) {
    const auto comma = rest.find(',');
    const auto tok = trim(rest.substr(0, comma));
    const auto d = csv::to_double(tok);
    if (!d) throw ConfigError("config key '" + key + "': bad list element: " + std::string(tok));
    out.push_back(*d);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void KeyValueConfig::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [k, v] : entries_)
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "' in " + origin_);
}

}  // namespace litmap
