// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "occ/dataset.hpp"
#include "occ/error.hpp"

namespace {

constexpr const char* kHeader = "timestamp,co2_ppm,t_indoor_c,rh_pct,occupied\n";

occ::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const occ::Error& e) {
    return e.code();
  }
  FAIL("expected occ::Error");
  return occ::ErrorCode::kFormat;
}

occ::SensorSeries grid(int n, std::int64_t start = 1700000010) {  // on the 30 s grid
  occ::SensorSeries s;
  for (int i = 0; i < n; ++i) s.records.push_back({start + 30 * i, 500.0 + i, 21.0, 40.0, static_cast<std::uint8_t>(i % 2)});
  return s;
}

}  // namespace

TEST_CASE("read_csv ingests well-formed rows") {
  std::istringstream in(std::string(kHeader) + "1700000000,500,21,40,0\n1700000030,510,21.1,41,1\n1700000060,520,21.2,42,1\n");
  const auto s = occ::read_csv(in);
  REQUIRE(s.size() == 3);
  CHECK(s.records[1].co2 == 510.0);
  CHECK(s.records[2].occupied == 1);
}

TEST_CASE("read_csv sorts rows by timestamp") {
  std::istringstream in(std::string(kHeader) + "1700000060,520,21,40,1\n1700000000,500,21,40,0\n1700000030,510,21,40,1\n");
  const auto s = occ::read_csv(in);
  REQUIRE(s.size() == 3);
  CHECK(s.records[0].co2 == 500.0);
  CHECK(s.records[1].co2 == 510.0);
  CHECK(s.records[2].co2 == 520.0);
}

TEST_CASE("read_csv reports the malformed line") {
  std::istringstream in(std::string(kHeader) + "1700000000,500,21,40,0\n1700000030,abc,21,40,1\n");
  try {
    occ::read_csv(in);
    FAIL("no error");
  } catch (const occ::Error& e) {
    CHECK(e.code() == occ::ErrorCode::kMalformedRow);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("read_csv rejects duplicates and missing columns") {
  std::istringstream dup(std::string(kHeader) + "1700000000,500,21,40,0\n1700000000,510,21,40,1\n");
  CHECK(code_of([&] { occ::read_csv(dup); }) == occ::ErrorCode::kDuplicateTimestamp);
  std::istringstream missing("timestamp,co2_ppm,t_indoor_c,occupied\n1700000000,500,21,0\n");
  CHECK(code_of([&] { occ::read_csv(missing); }) == occ::ErrorCode::kMissingColumn);
}

TEST_CASE("read_csv accepts ISO timestamps and clamps out-of-range readings") {
  std::istringstream in(std::string(kHeader) + "2024-01-01T00:00:00Z,250,21,40,0\n2024-01-01 00:00:30,500,21,140,1\n");
  occ::LoadDiagnostics diag;
  const auto s = occ::read_csv(in, {}, &diag);
  REQUIRE(s.size() == 2);
  CHECK(s.records[0].timestamp == 1704067200);
  CHECK(s.records[0].co2 == occ::kCo2Min);
  CHECK(s.records[1].rh == occ::kRhMax);
  CHECK(diag.clamped_co2 == 1);
  CHECK(diag.clamped_rh == 1);
  CHECK(occ::format_iso8601(1704067200) == "2024-01-01T00:00:00Z");
}

TEST_CASE("write_csv then read_csv reproduces values") {
  auto s = grid(50);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.records[i].co2 = 400.0 + std::sqrt(static_cast<double>(i)) * 123.456789;
    s.records[i].t_indoor = 20.0 + 1.0 / (1.0 + static_cast<double>(i));
    s.records[i].rh = 35.0 + std::sin(static_cast<double>(i));
  }
  std::stringstream io;
  occ::write_csv(io, s);
  const auto back = occ::read_csv(io);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.records[i].timestamp == s.records[i].timestamp);
    CHECK(back.records[i].co2 == s.records[i].co2);
    CHECK(back.records[i].t_indoor == s.records[i].t_indoor);
    CHECK(back.records[i].rh == s.records[i].rh);
    CHECK(back.records[i].occupied == s.records[i].occupied);
  }
}

TEST_CASE("regularize leaves a gapless grid untouched") {
  const auto s = grid(20);
  const auto out = occ::regularize(s, 300);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(out[0].records[i].timestamp == s.records[i].timestamp);
    CHECK(out[0].records[i].co2 == s.records[i].co2);
  }
}

TEST_CASE("regularize interpolates a single missing step") {
  occ::SensorSeries s;
  s.records = {{0, 500.0, 21.0, 40.0, 1}, {60, 520.0, 22.0, 42.0, 0}};
  const auto out = occ::regularize(s, 300);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].size() == 3);
  CHECK(out[0].records[1].timestamp == 30);
  CHECK(out[0].records[1].co2 == doctest::Approx(510.0).epsilon(1e-12));
  CHECK(out[0].records[1].t_indoor == doctest::Approx(21.5).epsilon(1e-12));
  CHECK(out[0].records[1].occupied == 1);
}

TEST_CASE("regularize splits at long gaps and is idempotent") {
  auto a = grid(10, 0);
  auto b = grid(10, 7200 + 270);
  a.records.insert(a.records.end(), b.records.begin(), b.records.end());
  const auto out = occ::regularize(a, 300);
  REQUIRE(out.size() == 2);
  CHECK(out[0].records.back().timestamp < 7200);
  CHECK(out[1].records.front().timestamp > 7200);
  for (const auto& seg : out) {
    const auto again = occ::regularize(seg, 300);
    REQUIRE(again.size() == 1);
    REQUIRE(again[0].size() == seg.size());
    for (std::size_t i = 0; i < seg.size(); ++i) CHECK(again[0].records[i].co2 == seg.records[i].co2);
  }
  CHECK(code_of([] { occ::regularize(occ::SensorSeries{}, 300); }) == occ::ErrorCode::kEmptySeries);
}

TEST_CASE("regularize snaps off-grid samples onto the absolute grid") {
  occ::SensorSeries s;
  s.records = {{10, 500.0, 21.0, 40.0, 0}, {40, 530.0, 21.0, 40.0, 0}, {70, 560.0, 21.0, 40.0, 0}};
  const auto out = occ::regularize(s, 300);
  REQUIRE(out.size() == 1);
  for (const auto& r : out[0].records) CHECK(r.timestamp % 30 == 0);
}

TEST_CASE("split produces half-open chronological ranges") {
  const auto s = grid(10, 0);
  const auto r = occ::split(s, {.train_end = 180, .val_end = 240});
  CHECK(r.train == occ::IndexRange{0, 6});
  CHECK(r.val == occ::IndexRange{6, 8});
  CHECK(r.test == occ::IndexRange{8, 10});

  const auto mid = occ::split(s, {.train_end = 170, .val_end = 235});
  CHECK(mid.train == occ::IndexRange{0, 6});
  CHECK(mid.val == occ::IndexRange{6, 8});

  CHECK(code_of([&] { occ::split(s, {.train_end = -30, .val_end = 240}); }) == occ::ErrorCode::kBoundaryOutsideSeries);
  CHECK(code_of([&] { occ::split(s, {.train_end = 180, .val_end = 900}); }) == occ::ErrorCode::kBoundaryOutsideSeries);
}

TEST_CASE("split ranges partition the series without leakage") {
  const auto s = grid(97, 0);
  for (std::int64_t te = 30; te < 2000; te += 290) {
    const auto r = occ::split(s, {.train_end = te, .val_end = te + 600});
    CHECK(r.train.begin == 0);
    CHECK(r.train.end == r.val.begin);
    CHECK(r.val.end == r.test.begin);
    CHECK(r.test.end == s.size());
    if (!r.train.empty() && !r.val.empty())
      CHECK(s.records[r.train.end - 1].timestamp < s.records[r.val.begin].timestamp);
  }
}
