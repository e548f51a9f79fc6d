// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/evalkit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occ/error.hpp"
#include "occ/kernels.hpp"

namespace occ {

double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptySet, "percentile of an empty sample");
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

std::vector<double> threshold_candidates(std::span<const double> scores, const ThresholdGrid& grid) {
  if (scores.empty()) throw Error(ErrorCode::kEmptySet, "no validation scores");
  if (grid.n_grid < 1 || grid.lo_pct > grid.hi_pct) throw Error(ErrorCode::kInvalidArgument, "bad threshold grid");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cand;
  cand.reserve(static_cast<std::size_t>(grid.n_grid) + 2);
  cand.push_back(sorted.front());
  for (int k = 0; k < grid.n_grid; ++k) {
    const double pct = grid.n_grid == 1 ? grid.lo_pct
                                        : grid.lo_pct + (grid.hi_pct - grid.lo_pct) * k / (grid.n_grid - 1);
    cand.push_back(percentile_sorted(sorted, pct));
  }
  cand.push_back(sorted.back());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return cand;
}

double select_threshold(const ScoredSet& val, const ThresholdGrid& grid) {
  if (val.scores.size() != val.labels.size()) throw Error(ErrorCode::kDimensionMismatch, "scores/labels length");
  if (std::none_of(val.labels.begin(), val.labels.end(), [](std::uint8_t y) { return y == 1; })) {
    throw Error(ErrorCode::kNoPositives, "validation set has no positive samples");
  }
  const auto cand = threshold_candidates(val.scores, grid);
  std::vector<double> f1(cand.size());
  kernels::f1_at_thresholds(val.scores, val.labels, cand, f1);
  std::size_t best = 0;
  for (std::size_t k = 1; k < cand.size(); ++k)
    if (f1[k] >= f1[best]) best = k;
  return cand[best];
}

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks (1-based) over tie groups; sum them for the positive class.
  double rank_sum = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]]) {
        rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j + 1;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) return 0.5;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

ConfusionRates confusion_row_normalize(const Confusion& counts) {
  ConfusionRates out{};
  for (int r = 0; r < 2; ++r) {
    const double total = static_cast<double>(counts[r][0] + counts[r][1]);
    if (total == 0.0) continue;
    for (int c = 0; c < 2; ++c) out[r][c] = static_cast<double>(counts[r][c]) / total;
  }
  return out;
}

EvalReport compute_metrics(const ScoredSet& test, double tau) {
  if (test.scores.empty()) throw Error(ErrorCode::kEmptySet, "cannot evaluate an empty set");
  if (test.scores.size() != test.labels.size()) throw Error(ErrorCode::kDimensionMismatch, "scores/labels length");
  EvalReport r;
  r.threshold = tau;
  r.samples = test.size();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int pred = test.scores[i] >= tau ? 1 : 0;
    ++r.confusion[test.labels[i] ? 1 : 0][pred];
  }
  const auto tp = static_cast<double>(r.confusion[1][1]), fp = static_cast<double>(r.confusion[0][1]),
             fn = static_cast<double>(r.confusion[1][0]), tn = static_cast<double>(r.confusion[0][0]);
  auto ratio = [&](double num, double den) {
    if (den == 0.0) {
      r.undefined_ratio = true;
      return 0.0;
    }
    return num / den;
  };
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  r.accuracy = (tp + tn) / static_cast<double>(r.samples);
  r.undefined_auc = (tp + fn) == 0.0 || (tn + fp) == 0.0;
  r.auc_roc = auc_roc(test.scores, test.labels);
  r.confusion_row_norm = confusion_row_normalize(r.confusion);
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["accuracy"] = r.accuracy;
  j["auc_roc"] = r.auc_roc;
  j["threshold"] = r.threshold;
  j["samples"] = r.samples;
  j["confusion"] = {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}};
  j["confusion_row_norm"] = {{r.confusion_row_norm[0][0], r.confusion_row_norm[0][1]},
                             {r.confusion_row_norm[1][0], r.confusion_row_norm[1][1]}};
  j["undefined_ratio"] = r.undefined_ratio;
  j["undefined_auc"] = r.undefined_auc;
  return j;
}

std::string report_csv_header() { return "precision,recall,f1,accuracy,auc_roc,threshold,tn,fp,fn,tp"; }

std::string report_csv_row(const EvalReport& r) {
  return fmt::format("{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.6g},{},{},{},{}", r.precision, r.recall, r.f1, r.accuracy,
                     r.auc_roc, r.threshold, r.confusion[0][0], r.confusion[0][1], r.confusion[1][0],
                     r.confusion[1][1]);
}

}  // namespace occ
