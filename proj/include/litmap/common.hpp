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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace litmap {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Bad input data: malformed files, referential inconsistencies.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or command usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal contract was violated (a bug, or numerically impossible state).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for a named stage, so adding a stage never perturbs the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index);

/// Hex digest of a file's bytes; used for provenance records.
std::string file_digest(const std::string& path);
std::string hex64(std::uint64_t v);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
/// contiguous blocks, so callers that write only to slot i stay deterministic.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace litmap
