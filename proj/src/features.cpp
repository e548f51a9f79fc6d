// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "occ/binio.hpp"
#include "occ/error.hpp"
#include "occ/kernels.hpp"

namespace occ {
namespace {

constexpr std::array<std::string_view, 5> kFeatureNames = {"co2", "t_indoor", "rh", "co2_slope", "season"};
constexpr std::array<std::string_view, kFullWidth> kColumnNames = {
    "co2", "t_indoor", "rh", "co2_slope", "season_winter", "season_spring", "season_summer", "season_autumn"};

}  // namespace

std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

FeatureMask FeatureMask::preset(std::string_view name) {
  if (name == "all") return all();
  if (name == "no-rh-t") return all().without(Feature::kRh).without(Feature::kTIndoor);
  if (name == "no-co2") return all().without(Feature::kCo2).without(Feature::kCo2Slope);
  throw Error(ErrorCode::kUnknownFeature, fmt::format("unknown mask preset '{}'", name));
}

FeatureMask FeatureMask::from_names(std::span<const std::string> names) {
  std::uint32_t bits = 0;
  for (const auto& n : names) {
    const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), n);
    if (it == kFeatureNames.end()) throw Error(ErrorCode::kUnknownFeature, fmt::format("unknown feature '{}'", n));
    bits |= 1u << static_cast<unsigned>(it - kFeatureNames.begin());
  }
  return FeatureMask(bits);
}

std::vector<int> FeatureMask::columns() const {
  std::vector<int> cols;
  for (int j = 0; j < kNumContinuous; ++j)
    if (has(static_cast<Feature>(j))) cols.push_back(j);
  if (has(Feature::kSeason))
    for (int j = 0; j < kNumSeasons; ++j) cols.push_back(kNumContinuous + j);
  return cols;
}

std::vector<std::string> FeatureMask::column_names() const {
  std::vector<std::string> out;
  for (int c : columns()) out.emplace_back(kColumnNames[static_cast<std::size_t>(c)]);
  return out;
}

std::vector<std::string> FeatureMask::names() const {
  std::vector<std::string> out;
  for (unsigned f = 0; f < kFeatureNames.size(); ++f)
    if (has(static_cast<Feature>(f))) out.emplace_back(kFeatureNames[f]);
  return out;
}

std::array<double, kNumSeasons> season_onehot(std::int64_t timestamp) {
  using namespace std::chrono;
  const auto day_count = static_cast<int>(std::floor(static_cast<double>(timestamp) / 86400.0));
  const year_month_day ymd{sys_days{days{day_count}}};
  const unsigned m = static_cast<unsigned>(ymd.month());
  // Dec-Feb winter, Mar-May spring, Jun-Aug summer, Sep-Nov autumn.
  const std::size_t season = (m % 12) / 3;
  std::array<double, kNumSeasons> out{};
  out[season] = 1.0;
  return out;
}

std::vector<double> co2_slope(const SensorSeries& series, double window) {
  std::vector<double> co2(series.size()), out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) co2[i] = series.records[i].co2;
  const double period = static_cast<double>(series.sample_period);
  const auto samples = static_cast<std::size_t>(std::max(1.0, std::round(window / period)));
  kernels::trailing_slope(co2, samples, period, out);
  return out;
}

RawFeatures build_raw_features(std::span<const SensorSeries> segments, double slope_window) {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.size();
  RawFeatures raw;
  raw.x.resize(static_cast<Eigen::Index>(total), kFullWidth);
  raw.y.reserve(total);
  raw.timestamps.reserve(total);
  raw.segment.reserve(total);
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (!raw.timestamps.empty() && !seg.empty() && seg.records.front().timestamp <= raw.timestamps.back()) {
      throw Error(ErrorCode::kInvalidArgument, "segments must be in time order");
    }
    const auto slope = co2_slope(seg, slope_window);
    for (std::size_t i = 0; i < seg.size(); ++i, ++row) {
      const auto& r = seg.records[i];
      const auto season = season_onehot(r.timestamp);
      raw.x.row(row) << r.co2, r.t_indoor, r.rh, slope[i], season[0], season[1], season[2], season[3];
      raw.y.push_back(r.occupied);
      raw.timestamps.push_back(r.timestamp);
      raw.segment.push_back(static_cast<std::uint32_t>(s));
    }
  }
  return raw;
}

bool Standardizer::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

void Standardizer::apply(RowMatrix& m) const {
  if (m.cols() != kFullWidth) throw Error(ErrorCode::kDimensionMismatch, "standardizer expects full-width rows");
  for (int j = 0; j < kNumContinuous; ++j) m.col(j) = (m.col(j).array() - mean[j]) / stddev[j];
}

Standardizer fit_standardizer(const RowMatrix& raw, IndexRange train) {
  if (train.empty() || train.end > static_cast<std::size_t>(raw.rows())) {
    throw Error(ErrorCode::kInvalidArgument, "training range must be non-empty and inside the table");
  }
  Standardizer st;
  const auto n = static_cast<double>(train.size());
  for (int j = 0; j < kNumContinuous; ++j) {
    const auto col = raw.col(j).segment(static_cast<Eigen::Index>(train.begin), static_cast<Eigen::Index>(train.size()));
    const double mu = col.sum() / n;
    const double var = (col.array() - mu).square().sum() / n;
    st.mean[j] = mu;
    if (var > 0.0 && std::sqrt(var) > 1e-12 * std::max(1.0, std::abs(mu))) {
      st.stddev[j] = std::sqrt(var);
    } else {
      st.stddev[j] = 1.0;
      st.degenerate[j] = true;
    }
  }
  return st;
}

FeatureTable make_table(const RawFeatures& raw, const Standardizer& standardizer, const SplitRanges& splits) {
  FeatureTable t;
  t.x = raw.x;
  standardizer.apply(t.x);
  t.y = raw.y;
  t.timestamps = raw.timestamps;
  t.segment = raw.segment;
  t.splits = splits;
  t.mask = FeatureMask::all();
  return t;
}

FeatureTable apply_mask(const FeatureTable& table, FeatureMask mask) {
  if ((mask.bits() & ~table.mask.bits()) != 0) {
    throw Error(ErrorCode::kUnknownFeature, "mask names features absent from the table");
  }
  const auto have = table.mask.columns();
  std::vector<Eigen::Index> pick;
  for (int c : mask.columns()) {
    pick.push_back(static_cast<Eigen::Index>(std::find(have.begin(), have.end(), c) - have.begin()));
  }
  FeatureTable out;
  out.x.resize(table.x.rows(), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t k = 0; k < pick.size(); ++k) out.x.col(static_cast<Eigen::Index>(k)) = table.x.col(pick[k]);
  out.y = table.y;
  out.timestamps = table.timestamps;
  out.segment = table.segment;
  out.splits = table.splits;
  out.mask = mask;
  return out;
}

FeatureTable slice_rows(const FeatureTable& table, IndexRange range) {
  if (range.end > table.rows()) throw Error(ErrorCode::kInvalidArgument, "row range outside table");
  const auto b = static_cast<Eigen::Index>(range.begin), n = static_cast<Eigen::Index>(range.size());
  FeatureTable out;
  out.x = table.x.middleRows(b, n);
  out.y.assign(table.y.begin() + b, table.y.begin() + b + n);
  out.timestamps.assign(table.timestamps.begin() + b, table.timestamps.begin() + b + n);
  out.segment.assign(table.segment.begin() + b, table.segment.begin() + b + n);
  auto clip = [&](IndexRange r) {
    const std::size_t lo = std::clamp(r.begin, range.begin, range.end) - range.begin;
    const std::size_t hi = std::clamp(r.end, range.begin, range.end) - range.begin;
    return IndexRange{lo, hi};
  };
  out.splits = {clip(table.splits.train), clip(table.splits.val), clip(table.splits.test)};
  out.mask = table.mask;
  return out;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLr: return "lr";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kLstm: return "lstm";
  }
  return "?";
}

ModelKind parse_model(std::string_view name) {
  if (name == "lr") return ModelKind::kLr;
  if (name == "svm") return ModelKind::kSvm;
  if (name == "lstm") return ModelKind::kLstm;
  throw Error(ErrorCode::kUnsupportedModel, fmt::format("unknown model '{}'", name));
}

FeatureMask model_mask(ModelKind kind, FeatureMask ablation) {
  return kind == ModelKind::kLstm ? ablation.without(Feature::kSeason) : ablation.with(Feature::kSeason);
}

namespace {

int split_of(const FeatureTable& t, std::size_t i) {
  if (t.splits.train.contains(i)) return 0;
  if (t.splits.val.contains(i)) return 1;
  if (t.splits.test.contains(i)) return 2;
  return 3;
}

}  // namespace

WindowSet make_windows(const FeatureTable& table, std::size_t seq_len, std::size_t stride, IndexRange within) {
  if (seq_len < 1 || stride < 1) throw Error(ErrorCode::kInvalidArgument, "seq_len and stride must be positive");
  if (within.end > table.rows()) throw Error(ErrorCode::kInvalidArgument, "window range outside table");
  WindowSet ws;
  ws.seq_len = seq_len;
  std::size_t run_begin = within.begin;
  for (std::size_t i = within.begin; i <= within.end; ++i) {
    const bool boundary = i == within.end || (i > run_begin && (table.segment[i] != table.segment[i - 1] ||
                                                                 split_of(table, i) != split_of(table, i - 1)));
    if (!boundary) continue;
    for (std::size_t end = run_begin + seq_len - 1; end < i; end += stride) ws.ends.push_back(end);
    run_begin = i;
  }
  if (ws.empty()) throw Error(ErrorCode::kSeriesTooShort, fmt::format("no run holds a window of length {}", seq_len));
  return ws;
}

WindowSet make_windows(const FeatureTable& table, std::size_t seq_len, std::size_t stride) {
  return make_windows(table, seq_len, stride, IndexRange{0, table.rows()});
}

SequenceWindow materialize(const FeatureTable& table, const WindowSet& windows, std::size_t k) {
  SequenceWindow w;
  const std::size_t end = windows.ends.at(k);
  const auto L = static_cast<Eigen::Index>(windows.seq_len);
  w.matrix = table.x.middleRows(static_cast<Eigen::Index>(end) - L + 1, L).transpose();
  w.label = table.y[end];
  return w;
}

void save_feature_table(const std::filesystem::path& path, const FeatureTable& t) {
  BinaryWriter w(path);
  w.magic("OCFT");
  w.put<std::uint32_t>(1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.width()));
  w.put<std::uint64_t>(t.rows());
  w.put<std::uint32_t>(t.mask.bits());
  for (const auto& r : {t.splits.train, t.splits.val, t.splits.test}) {
    w.put<std::uint64_t>(r.begin);
    w.put<std::uint64_t>(r.end);
  }
  w.put_span(std::span<const double>(t.x.data(), static_cast<std::size_t>(t.x.size())));
  w.put_span(std::span<const std::uint8_t>(t.y));
  w.put_span(std::span<const std::int64_t>(t.timestamps));
  w.put_span(std::span<const std::uint32_t>(t.segment));
  w.close();
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("OCFT");
  if (r.get<std::uint32_t>() != 1) throw Error(ErrorCode::kFormat, "unsupported feature cache version");
  const auto d = r.get<std::uint32_t>();
  const auto T = r.get<std::uint64_t>();
  FeatureTable t;
  t.mask = FeatureMask(r.get<std::uint32_t>());
  if (static_cast<std::uint32_t>(t.mask.width()) != d) throw Error(ErrorCode::kFormat, "mask/width mismatch");
  for (auto* range : {&t.splits.train, &t.splits.val, &t.splits.test}) {
    range->begin = r.get<std::uint64_t>();
    range->end = r.get<std::uint64_t>();
  }
  t.x.resize(static_cast<Eigen::Index>(T), d);
  r.get_span(std::span<double>(t.x.data(), static_cast<std::size_t>(t.x.size())));
  t.y.resize(T);
  r.get_span(std::span<std::uint8_t>(t.y));
  t.timestamps.resize(T);
  r.get_span(std::span<std::int64_t>(t.timestamps));
  t.segment.resize(T);
  r.get_span(std::span<std::uint32_t>(t.segment));
  return t;
}

}  // namespace occ
