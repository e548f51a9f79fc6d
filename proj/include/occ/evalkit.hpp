// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_EVALKIT_HPP
#define OCC_EVALKIT_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace occ {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return scores.size(); }
};

// counts[true_class][predicted_class], class 1 = occupied.
using Confusion = std::array<std::array<std::uint64_t, 2>, 2>;
using ConfusionRates = std::array<std::array<double, 2>, 2>;

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auc_roc = 0.0;
  Confusion confusion{};
  ConfusionRates confusion_row_norm{};
  double threshold = 0.0;
  std::size_t samples = 0;
  // Set when a precision/recall/F1 denominator vanished and 0 was substituted,
  // or when AUC is undefined because only one class is present.
  bool undefined_ratio = false;
  bool undefined_auc = false;
};

struct ThresholdGrid {
  double lo_pct = 1.0;
  double hi_pct = 99.0;
  int n_grid = 197;  // 1..99 in steps of 0.5
};

// Linear-interpolated percentile (0..100) of an ascending-sorted sample.
double percentile_sorted(std::span<const double> sorted, double pct);

// Candidate thresholds: n_grid evenly spaced percentiles in [lo_pct, hi_pct]
// plus the minimum and maximum score, ascending and de-duplicated.
std::vector<double> threshold_candidates(std::span<const double> scores, const ThresholdGrid& grid = {});

// The candidate maximizing positive-class F1; ties go to the larger threshold.
double select_threshold(const ScoredSet& val, const ThresholdGrid& grid = {});

// Mann-Whitney rank statistic; tied scores contribute one half.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Predicts occupied iff score >= tau.
EvalReport compute_metrics(const ScoredSet& test, double tau);

ConfusionRates confusion_row_normalize(const Confusion& counts);

nlohmann::ordered_json to_json(const EvalReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace occ

#endif  // OCC_EVALKIT_HPP
