// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_FEATURES_HPP
#define OCC_FEATURES_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occ/dataset.hpp"
#include "occ/types.hpp"

namespace occ {

// Logical feature groups. kSeason expands to four one-hot columns.
enum class Feature : std::uint8_t { kCo2 = 0, kTIndoor = 1, kRh = 2, kCo2Slope = 3, kSeason = 4 };

inline constexpr int kNumContinuous = 4;
inline constexpr int kNumSeasons = 4;
inline constexpr int kFullWidth = kNumContinuous + kNumSeasons;
inline constexpr double kDefaultSlopeWindow = 900.0;  // seconds

std::string_view feature_name(Feature f);

// Active-feature subset as a bitmap over Feature.
class FeatureMask {
 public:
  constexpr FeatureMask() = default;
  constexpr explicit FeatureMask(std::uint32_t bits) : bits_(bits & 0x1Fu) {}

  static constexpr FeatureMask all() { return FeatureMask(0x1Fu); }
  // Accepts "all", "no-rh-t", "no-co2" (the ablation presets).
  static FeatureMask preset(std::string_view name);
  // Builds a mask from feature names; unknown names raise UnknownFeature.
  static FeatureMask from_names(std::span<const std::string> names);

  bool has(Feature f) const { return (bits_ >> static_cast<unsigned>(f)) & 1u; }
  FeatureMask with(Feature f) const { return FeatureMask(bits_ | (1u << static_cast<unsigned>(f))); }
  FeatureMask without(Feature f) const { return FeatureMask(bits_ & ~(1u << static_cast<unsigned>(f))); }
  std::uint32_t bits() const { return bits_; }

  // Column indices into the full 8-column layout, in layout order.
  std::vector<int> columns() const;
  int width() const { return static_cast<int>(columns().size()); }
  std::vector<std::string> column_names() const;
  std::vector<std::string> names() const;

  friend bool operator==(FeatureMask, FeatureMask) = default;

 private:
  std::uint32_t bits_ = 0x1Fu;
};

// One-hot (winter, spring, summer, autumn) from the UTC month.
std::array<double, kNumSeasons> season_onehot(std::int64_t timestamp);

// Trailing least-squares CO2 slope in ppm/s over `window` seconds, i.e. the
// last window/sample_period samples including t.
std::vector<double> co2_slope(const SensorSeries& series, double window = kDefaultSlopeWindow);

// Unstandardized full-width features for one or more regularized segments,
// concatenated in time order.
struct RawFeatures {
  RowMatrix x;  // T x kFullWidth
  std::vector<std::uint8_t> y;
  std::vector<std::int64_t> timestamps;
  std::vector<std::uint32_t> segment;

  std::size_t rows() const { return y.size(); }
};

RawFeatures build_raw_features(std::span<const SensorSeries> segments, double slope_window = kDefaultSlopeWindow);

struct Standardizer {
  std::array<double, kNumContinuous> mean{};
  std::array<double, kNumContinuous> stddev{1.0, 1.0, 1.0, 1.0};
  std::array<bool, kNumContinuous> degenerate{};

  bool any_degenerate() const;
  // Standardizes the continuous columns of a full-width matrix in place.
  void apply(RowMatrix& full_width) const;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// Population mean/std of the continuous columns over `train` rows. A constant
// column is flagged degenerate and gets stddev 1.
Standardizer fit_standardizer(const RowMatrix& raw, IndexRange train);

struct FeatureTable {
  RowMatrix x;  // T x mask.width(), standardized
  std::vector<std::uint8_t> y;
  std::vector<std::int64_t> timestamps;
  std::vector<std::uint32_t> segment;
  SplitRanges splits;
  FeatureMask mask = FeatureMask::all();

  std::size_t rows() const { return y.size(); }
  int width() const { return static_cast<int>(x.cols()); }
};

// Standardizes raw features with a fitted standardizer (never refits).
FeatureTable make_table(const RawFeatures& raw, const Standardizer& standardizer, const SplitRanges& splits);

// Restricts the table to the masked columns. The mask must be a subset of the
// table's current mask.
FeatureTable apply_mask(const FeatureTable& table, FeatureMask mask);

// Rows of `range`, optionally restricted to a row subset.
FeatureTable slice_rows(const FeatureTable& table, IndexRange range);

enum class ModelKind { kLr, kSvm, kLstm };
std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);

// Static models always see the season columns; the sequence model never does.
FeatureMask model_mask(ModelKind kind, FeatureMask ablation);

// Windows are stored as end indices into a table; materialize on demand.
struct SequenceWindow {
  RowMatrix matrix;  // width x seq_len, oldest sample in column 0
  std::uint8_t label = 0;
};

struct WindowSet {
  std::vector<std::size_t> ends;
  std::size_t seq_len = 1;

  std::size_t size() const { return ends.size(); }
  bool empty() const { return ends.empty(); }
};

// Windows ending at run_begin + seq_len - 1, +stride, ... within every
// maximal run of rows sharing one segment and one split. When `within` is
// given only rows of that range are used.
WindowSet make_windows(const FeatureTable& table, std::size_t seq_len, std::size_t stride);
WindowSet make_windows(const FeatureTable& table, std::size_t seq_len, std::size_t stride, IndexRange within);

SequenceWindow materialize(const FeatureTable& table, const WindowSet& windows, std::size_t k);

// Binary cache: "OCFT" magic, u32 version, u32 d, u64 T, u32 mask bits,
// six u64 split bounds, T*d f64 row-major, T u8 labels, T i64 timestamps,
// T u32 segment ids. Little-endian.
void save_feature_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_feature_table(const std::filesystem::path& path);

}  // namespace occ

#endif  // OCC_FEATURES_HPP
