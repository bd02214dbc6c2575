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

#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "litmap/common.hpp"
#include "litmap/csv.hpp"
#include "litmap/ingest.hpp"

using namespace litmap;
using namespace litmap::ingest;

namespace {

template <class T, class Parser>
std::pair<std::vector<T>, ParseStats> parse_text(Parser parser, const std::string& text,
                                                 ParseOptions opts = {}) {
  std::istringstream in(text);
  std::vector<T> out;
  auto stats = parser(in, [&](T&& r) { out.push_back(std::move(r)); }, opts);
  return {out, stats};
}

const std::string kCdr = std::string(kCdrHeader) + "\n";

}  // namespace

TEST_CASE("an incoming SMS row maps field by field") {
  auto [rows, stats] =
      parse_text<CdrEvent>(parse_cdr, kCdr + "s1,2016-01-04T08:00:00Z,I,SMS,s9,,,T12,0.00\n");
  REQUIRE(rows.size() == 1);
  CHECK(stats.errors == 0);
  const auto& e = rows[0];
  CHECK(e.subscriber_id == "s1");
  CHECK(e.timestamp == *parse_utc("2016-01-04T08:00:00Z"));
  CHECK(e.direction == Direction::kIn);
  CHECK(e.channel == Channel::kSms);
  CHECK(e.peer_id == std::optional<std::string>("s9"));
  CHECK_FALSE(e.duration_s.has_value());
  CHECK(e.tower_id == "T12");
  CHECK(e.charge == 0.0);
}

TEST_CASE("a DATA row with a peer is a row error") {
  auto [rows, stats] = parse_text<CdrEvent>(
      parse_cdr, kCdr + "s1,2016-01-04T08:00:00Z,O,DATA,s9,,100,T12,1.0\n");
  CHECK(rows.empty());
  REQUIRE(stats.errors == 1);
  CHECK(stats.error_records[0].message.find("peer_id must be empty for DATA") != std::string::npos);

  ParseOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(parse_text<CdrEvent>(parse_cdr,
                                       kCdr + "s1,2016-01-04T08:00:00Z,O,DATA,s9,,100,T12,1.0\n",
                                       strict),
                  DataError);
}

TEST_CASE("rows are conserved: emitted plus errors equals data rows") {
  std::string text = kCdr;
  for (int i = 0; i < 10000; ++i) {
    if (i % 97 == 0)
      text += "s" + std::to_string(i) + ",bad-time,O,VOICE,p,10,,T1,0.5\n";
    else
      text += "s" + std::to_string(i) + ",2016-01-05T10:00:00Z,O,VOICE,p,10,,T1,0.5\n";
  }
  auto [rows, stats] = parse_text<CdrEvent>(parse_cdr, text);
  CHECK(stats.rows == 10000);
  CHECK(stats.emitted == rows.size());
  CHECK(stats.emitted + stats.errors == stats.rows);
  CHECK(stats.errors == 104);
}

TEST_CASE("towers, labels and top-ups") {
  auto [towers, ts] =
      parse_text<Tower>(parse_towers, std::string(kTowerHeader) + "\nT1,90.40,23.75,DistrictA\n");
  REQUIRE(towers.size() == 1);
  CHECK(towers[0] == Tower{"T1", 90.40, 23.75, "DistrictA"});

  CHECK_THROWS_AS(parse_text<LiteracyLabel>(parse_labels,
                                            std::string(kLabelHeader) + "\ns1,0\ns1,1\n"),
                  DataError);

  auto [topups, us] = parse_text<TopUpEvent>(
      parse_topups, std::string(kTopUpHeader) + "\ns1,2016-01-04T08:00:00Z,0\n");
  CHECK(topups.empty());
  REQUIRE(us.errors == 1);
  CHECK(us.error_records[0].message.find("amount must be positive") != std::string::npos);
}

TEST_CASE("round trip through the writers") {
  CdrEvent e = testing::event("s1", 1451900000, Direction::kOut, Channel::kVoice, "T3", "s2");
  e.charge = 1.5;
  std::ostringstream out;
  write_csv<CdrEvent>(out, kCdrHeader, std::span<const CdrEvent>(&e, 1));
  auto [rows, stats] = parse_text<CdrEvent>(parse_cdr, out.str());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == e);
}

TEST_CASE("bundle validation") {
  const ObservationWindow w{*parse_utc("2016-01-04T00:00:00Z"), 30};
  std::vector<Tower> towers{{"T1", 90.4, 23.7, "D"}, {"T2", 90.41, 23.71, "D"}};
  std::vector<LiteracyLabel> labels{{"s1", true}, {"s2", false}};
  std::vector<HandsetRecord> handsets;
  std::vector<TopUpEvent> topups;
  std::vector<CdrEvent> events{
      testing::event("s1", w.start + 100, Direction::kOut, Channel::kSms, "T1"),
      testing::event("s2", w.start + 200, Direction::kIn, Channel::kSms, "T2")};

  SUBCASE("consistent bundle gives an empty report") {
    CHECK(validate_bundle(events, topups, towers, handsets, labels, w).empty());
  }
  SUBCASE("unknown tower is listed") {
    events.push_back(testing::event("s1", w.start + 300, Direction::kOut, Channel::kSms, "T99"));
    const auto r = validate_bundle(events, topups, towers, handsets, labels, w);
    CHECK(r.missing_towers == std::vector<std::string>{"T99"});
    CHECK(r.blocking());
  }
  SUBCASE("labeled subscriber without events is reported, not an error") {
    labels.push_back({"s3", true});
    const auto r = validate_bundle(events, topups, towers, handsets, labels, w);
    CHECK(r.zero_event_subscribers == std::vector<std::string>{"s3"});
    CHECK_FALSE(r.blocking());
  }
}

TEST_CASE("csv helpers") {
  std::vector<std::string_view> f;
  std::string scratch;
  REQUIRE(csv::split("a,\"b,c\",\"d\"\"e\"", f, scratch));
  REQUIRE(f.size() == 3);
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK_FALSE(csv::split("\"open", f, scratch));
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789})
    CHECK(*csv::to_double(csv::format_double(v)) == v);
}
