// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "occ/error.hpp"

namespace occ {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

double clamp_counted(double v, double lo, double hi, std::size_t& counter) {
  if (v < lo) {
    ++counter;
    return lo;
  }
  if (v > hi) {
    ++counter;
    return hi;
  }
  return v;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
  text = trim(text);
  std::int64_t epoch = 0;
  {
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, epoch);
    if (ec == std::errc() && ptr == end) return epoch;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s);
  if (n != 7 || (sep != 'T' && sep != ' ')) {
    throw Error(ErrorCode::kFormat, fmt::format("unrecognized timestamp '{}'", buf));
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(ErrorCode::kFormat, fmt::format("invalid calendar timestamp '{}'", buf));
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const auto day_count = static_cast<std::int64_t>(std::floor(static_cast<double>(epoch_seconds) / 86400.0));
  const std::int64_t rem = epoch_seconds - day_count * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600,
                     (rem % 3600) / 60, rem % 60);
}

SensorSeries read_csv(std::istream& in, const CsvSchema& schema, LoadDiagnostics* diagnostics) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMissingColumn, "empty CSV, no header row");
  const auto header = split_fields(line);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(std::string(header[i]), i);

  auto resolve = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw Error(ErrorCode::kMissingColumn, fmt::format("column '{}' not found", name));
    return it->second;
  };
  const std::size_t c_ts = resolve(schema.timestamp), c_co2 = resolve(schema.co2),
                    c_t = resolve(schema.t_indoor), c_rh = resolve(schema.rh),
                    c_occ = resolve(schema.occupied);
  const std::size_t needed = std::max({c_ts, c_co2, c_t, c_rh, c_occ}) + 1;

  LoadDiagnostics diag;
  SensorSeries series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < needed) {
      throw Error(ErrorCode::kMalformedRow, fmt::format("line {}: expected at least {} fields, got {}", line_no,
                                                        needed, fields.size()));
    }
    SensorRecord rec;
    try {
      rec.timestamp = parse_timestamp(fields[c_ts]);
    } catch (const Error&) {
      throw Error(ErrorCode::kMalformedRow, fmt::format("line {}: bad timestamp '{}'", line_no, fields[c_ts]));
    }
    auto number = [&](std::size_t col, const std::string& name) {
      double v = 0.0;
      if (!parse_double(fields[col], v)) {
        throw Error(ErrorCode::kMalformedRow,
                    fmt::format("line {}: non-numeric {} '{}'", line_no, name, fields[col]));
      }
      return v;
    };
    rec.co2 = clamp_counted(number(c_co2, schema.co2), kCo2Min, kCo2Max, diag.clamped_co2);
    rec.t_indoor = clamp_counted(number(c_t, schema.t_indoor), kTempMin, kTempMax, diag.clamped_t_indoor);
    rec.rh = clamp_counted(number(c_rh, schema.rh), kRhMin, kRhMax, diag.clamped_rh);
    const double occ = number(c_occ, schema.occupied);
    if (occ != 0.0 && occ != 1.0) {
      throw Error(ErrorCode::kMalformedRow, fmt::format("line {}: occupancy must be 0 or 1", line_no));
    }
    rec.occupied = static_cast<std::uint8_t>(occ);
    series.records.push_back(rec);
  }
  diag.rows = series.records.size();

  std::stable_sort(series.records.begin(), series.records.end(),
                   [](const SensorRecord& a, const SensorRecord& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < series.records.size(); ++i) {
    if (series.records[i].timestamp == series.records[i - 1].timestamp) {
      throw Error(ErrorCode::kDuplicateTimestamp,
                  fmt::format("timestamp {} appears more than once", series.records[i].timestamp));
    }
  }
  if (diagnostics) *diagnostics = diag;
  return series;
}

SensorSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema, LoadDiagnostics* diagnostics) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open '{}'", path.string()));
  SensorSeries s = read_csv(in, schema, diagnostics);
  s.source_id = path.stem().string();
  return s;
}

void write_csv(std::ostream& out, const SensorSeries& series, const CsvSchema& schema) {
  out << schema.timestamp << ',' << schema.co2 << ',' << schema.t_indoor << ',' << schema.rh << ','
      << schema.occupied << '\n';
  std::string buf;
  for (const auto& r : series.records) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\n", r.timestamp, r.co2, r.t_indoor, r.rh,
                   static_cast<int>(r.occupied));
    out << buf;
  }
}

void write_csv(const std::filesystem::path& path, const SensorSeries& series, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  write_csv(out, series, schema);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("write failed for '{}'", path.string()));
}

namespace {

std::int64_t ceil_to_grid(std::int64_t t, std::int64_t period) {
  std::int64_t q = t / period;
  if (q * period < t) ++q;
  return q * period;
}

// Resample records[first, last] (no internal gap above max_gap) onto the grid.
SensorSeries resample_segment(const SensorSeries& src, std::size_t first, std::size_t last) {
  SensorSeries out;
  out.sample_period = src.sample_period;
  out.source_id = src.source_id;
  const auto& rec = src.records;
  const std::int64_t period = src.sample_period;
  std::size_t k = first;
  for (std::int64_t g = ceil_to_grid(rec[first].timestamp, period); g <= rec[last].timestamp; g += period) {
    while (k + 1 <= last && rec[k + 1].timestamp <= g) ++k;
    const SensorRecord& a = rec[k];
    if (a.timestamp == g) {
      out.records.push_back(a);
      out.records.back().timestamp = g;
      continue;
    }
    const SensorRecord& b = rec[k + 1];
    const double w = static_cast<double>(g - a.timestamp) / static_cast<double>(b.timestamp - a.timestamp);
    SensorRecord r;
    r.timestamp = g;
    r.co2 = a.co2 + w * (b.co2 - a.co2);
    r.t_indoor = a.t_indoor + w * (b.t_indoor - a.t_indoor);
    r.rh = a.rh + w * (b.rh - a.rh);
    r.occupied = a.occupied;
    out.records.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<SensorSeries> regularize(const SensorSeries& series, std::int64_t max_gap) {
  if (series.empty()) throw Error(ErrorCode::kEmptySeries, "cannot regularize an empty series");
  if (series.sample_period <= 0 || max_gap < series.sample_period) {
    throw Error(ErrorCode::kInvalidArgument, "max_gap must be at least the sample period");
  }
  const auto& rec = series.records;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i].timestamp <= rec[i - 1].timestamp) {
      throw Error(ErrorCode::kInvalidArgument, "series must be strictly increasing in time");
    }
  }
  std::vector<SensorSeries> segments;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= rec.size(); ++i) {
    if (i == rec.size() || rec[i].timestamp - rec[i - 1].timestamp > max_gap) {
      SensorSeries seg = resample_segment(series, first, i - 1);
      if (!seg.empty()) segments.push_back(std::move(seg));
      first = i;
    }
  }
  if (segments.empty()) throw Error(ErrorCode::kEmptySeries, "no grid-aligned samples in series");
  return segments;
}

SplitRanges split(std::span<const std::int64_t> ts, const SplitSpec& spec) {
  if (ts.empty()) throw Error(ErrorCode::kEmptySeries, "cannot split an empty series");
  if (spec.train_end >= spec.val_end) {
    throw Error(ErrorCode::kInvalidArgument, "train_end must precede val_end");
  }
  if (spec.train_end <= ts.front() || spec.val_end > ts.back()) {
    throw Error(ErrorCode::kBoundaryOutsideSeries,
                fmt::format("split boundaries [{}, {}] outside series span [{}, {}]", spec.train_end, spec.val_end,
                            ts.front(), ts.back()));
  }
  const auto train_end = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), spec.train_end) - ts.begin());
  const auto val_end = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), spec.val_end) - ts.begin());
  SplitRanges r{{0, train_end}, {train_end, val_end}, {val_end, ts.size()}};
  if (r.val.empty() || r.test.empty()) {
    throw Error(ErrorCode::kBoundaryOutsideSeries, "split leaves an empty validation or test range");
  }
  return r;
}

SplitRanges split(const SensorSeries& series, const SplitSpec& spec) {
  std::vector<std::int64_t> ts;
  ts.reserve(series.size());
  for (const auto& r : series.records) ts.push_back(r.timestamp);
  return split(ts, spec);
}

}  // namespace occ
