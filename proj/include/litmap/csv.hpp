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
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace litmap::csv {

/// Splits one CSV record. Handles RFC 4180 quoting; quoted fields are
/// unescaped into `scratch`, so returned views stay valid until the next call.
/// Returns false on an unterminated quote.
bool split(std::string_view line, std::vector<std::string_view>& fields, std::string& scratch);

/// Reads lines lazily, stripping a trailing '\r'. Tracks 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string_view& line);
  std::size_t line_number() const { return line_no_; }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_no_ = 0;
};

std::optional<double> to_double(std::string_view s);
std::optional<std::int64_t> to_int(std::string_view s);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits.
std::string format_fixed(double v, int decimals);

void write_field(std::ostream& out, std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace litmap::csv
