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
// Small builders shared by the unit suites.

#include <filesystem>
#include <random>
#include <string>

#include "litmap/ingest.hpp"

namespace litmap::testing {

inline ingest::CdrEvent event(const std::string& sub, EpochSeconds t, ingest::Direction d,
                              ingest::Channel c, const std::string& tower,
                              std::optional<std::string> peer = std::nullopt) {
  ingest::CdrEvent e;
  e.subscriber_id = sub;
  e.timestamp = t;
  e.direction = d;
  e.channel = c;
  e.tower_id = tower;
  if (ingest::has_peer(c)) e.peer_id = peer ? *peer : std::string("p0");
  if (ingest::has_duration(c)) e.duration_s = 60;
  if (ingest::has_volume(c)) e.volume_bytes = 1000;
  return e;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("litmap-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace litmap::testing
