// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_DATASET_HPP
#define OCC_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace occ {

inline constexpr std::int64_t kSamplePeriod = 30;

// Physical ranges a reading is clamped into on ingestion.
inline constexpr double kCo2Min = 300.0, kCo2Max = 10000.0;
inline constexpr double kTempMin = -10.0, kTempMax = 50.0;
inline constexpr double kRhMin = 0.0, kRhMax = 100.0;

struct SensorRecord {
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  double co2 = 0.0;            // ppm
  double t_indoor = 0.0;       // degC
  double rh = 0.0;             // %
  std::uint8_t occupied = 0;
};

struct SensorSeries {
  std::vector<SensorRecord> records;
  std::int64_t sample_period = kSamplePeriod;
  std::string source_id;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Column names resolved against the CSV header.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string co2 = "co2_ppm";
  std::string t_indoor = "t_indoor_c";
  std::string rh = "rh_pct";
  std::string occupied = "occupied";
};

// Per-channel count of readings clamped into the physical range.
struct LoadDiagnostics {
  std::size_t rows = 0;
  std::size_t clamped_co2 = 0;
  std::size_t clamped_t_indoor = 0;
  std::size_t clamped_rh = 0;
};

// Accepts "YYYY-MM-DDTHH:MM:SS" (optional trailing Z, space separator allowed)
// or integral epoch seconds.
std::int64_t parse_timestamp(std::string_view text);
std::string format_iso8601(std::int64_t epoch_seconds);

SensorSeries read_csv(std::istream& in, const CsvSchema& schema = {},
                      LoadDiagnostics* diagnostics = nullptr);
SensorSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema = {},
                      LoadDiagnostics* diagnostics = nullptr);

// Timestamps are written as epoch seconds, channels in shortest round-trip form.
void write_csv(std::ostream& out, const SensorSeries& series, const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const SensorSeries& series,
               const CsvSchema& schema = {});

inline constexpr std::int64_t kDefaultMaxGap = 600;

// Resamples onto the absolute sample_period grid. Gaps up to max_gap are
// bridged (linear interpolation of continuous channels, occupancy carried
// forward); longer gaps start a new segment.
std::vector<SensorSeries> regularize(const SensorSeries& series,
                                     std::int64_t max_gap = kDefaultMaxGap);

struct SplitSpec {
  std::int64_t train_end = 0;
  std::int64_t val_end = 0;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct SplitRanges {
  IndexRange train, val, test;
};

// Half-open: train = [.., train_end), val = [train_end, val_end), test = rest.
SplitRanges split(std::span<const std::int64_t> timestamps, const SplitSpec& spec);
SplitRanges split(const SensorSeries& series, const SplitSpec& spec);

}  // namespace occ

#endif  // OCC_DATASET_HPP
