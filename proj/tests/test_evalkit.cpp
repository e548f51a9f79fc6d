// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "occ/error.hpp"
#include "occ/evalkit.hpp"
#include "oracles.hpp"

namespace {

occ::ScoredSet random_set(std::mt19937_64& rng, std::size_t n, double separation, bool ties) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution pos(0.35);
  occ::ScoredSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t y = pos(rng);
    double v = g(rng) + (y ? separation : 0.0);
    if (ties) v = std::round(v * 4.0) / 4.0;
    s.scores.push_back(v);
    s.labels.push_back(y);
  }
  s.labels[0] = 1;
  s.labels[1] = 0;
  return s;
}

}  // namespace

TEST_CASE("compute_metrics on hand counts") {
  // TP=2, FP=1, FN=1, TN=6
  occ::ScoredSet s{{0.9, 0.8, 0.7, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}, {1, 1, 0, 1, 0, 0, 0, 0, 0, 0}};
  const auto r = occ::compute_metrics(s, 0.5);
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.accuracy == doctest::Approx(0.8));
  CHECK(r.confusion[1][1] == 2);
  CHECK(r.confusion[0][1] == 1);
  CHECK(r.confusion[1][0] == 1);
  CHECK(r.confusion[0][0] == 6);
  CHECK(r.samples == 10);
  CHECK_FALSE(r.undefined_ratio);
}

TEST_CASE("perfect classifier scores one everywhere") {
  occ::ScoredSet s{{1, 0, 1, 1, 0}, {1, 0, 1, 1, 0}};
  const auto r = occ::compute_metrics(s, 0.5);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.auc_roc == 1.0);
}

TEST_CASE("vanishing denominators are flagged") {
  occ::ScoredSet s{{0.1, 0.2}, {0, 0}};
  const auto r = occ::compute_metrics(s, 0.5);
  CHECK(r.precision == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.undefined_ratio);
  CHECK(r.undefined_auc);
  CHECK_THROWS_AS(occ::compute_metrics({}, 0.5), occ::Error);
}

TEST_CASE("metrics agree with recomputation from the confusion matrix") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_set(rng, 300, 1.0, rep % 2 == 0);
    const auto r = occ::compute_metrics(s, 0.3);
    const double tp = static_cast<double>(r.confusion[1][1]), fp = static_cast<double>(r.confusion[0][1]);
    const double fn = static_cast<double>(r.confusion[1][0]), tn = static_cast<double>(r.confusion[0][0]);
    CHECK(tp + fp + fn + tn == 300.0);
    CHECK(r.precision == doctest::Approx(tp / (tp + fp)));
    CHECK(r.recall == doctest::Approx(tp / (tp + fn)));
    CHECK(r.f1 == doctest::Approx(2.0 * r.precision * r.recall / (r.precision + r.recall)));
    CHECK(r.accuracy == doctest::Approx((tp + tn) / 300.0));
    CHECK(r.f1 == doctest::Approx(oracle::f1_at(s.scores, s.labels, 0.3)));
    for (const auto& row : r.confusion_row_norm) CHECK(row[0] + row[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("confusion_row_normalize") {
  using C = occ::Confusion;
  using R = occ::ConfusionRates;
  CHECK(occ::confusion_row_normalize(C{{{8, 2}, {1, 9}}}) == R{{{0.8, 0.2}, {0.1, 0.9}}});
  CHECK(occ::confusion_row_normalize(C{{{0, 0}, {3, 1}}}) == R{{{0.0, 0.0}, {0.75, 0.25}}});
  CHECK(occ::confusion_row_normalize(C{{{5, 0}, {0, 5}}}) == R{{{1.0, 0.0}, {0.0, 1.0}}});
}

TEST_CASE("rank AUC equals pairwise counting and is invariant under monotone maps") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const auto s = random_set(rng, 200, 0.8, rep % 2 == 1);
    const double auc = occ::auc_roc(s.scores, s.labels);
    CHECK(std::abs(auc - oracle::pairwise_auc(s.scores, s.labels)) <= 1e-12);
    std::vector<double> e(s.scores), a(s.scores);
    for (auto& v : e) v = std::exp(v);
    for (auto& v : a) v = 3.0 * v - 7.0;
    CHECK(std::abs(occ::auc_roc(e, s.labels) - auc) <= 1e-12);
    CHECK(std::abs(occ::auc_roc(a, s.labels) - auc) <= 1e-12);
  }
}

TEST_CASE("raising the threshold never raises recall") {
  std::mt19937_64 rng(8);
  const auto s = random_set(rng, 400, 1.0, true);
  double prev = 2.0;
  for (double tau = -4.0; tau <= 4.0; tau += 0.05) {
    const double r = occ::compute_metrics(s, tau).recall;
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("select_threshold on separable and degenerate sets") {
  occ::ScoredSet sep{{0.1, 0.2, 0.3, 0.35, 0.7, 0.8, 0.9}, {0, 0, 0, 0, 1, 1, 1}};
  CHECK(occ::compute_metrics(sep, occ::select_threshold(sep)).f1 == 1.0);

  occ::ScoredSet all_pos{{0.4, -3.0, 2.0, 0.1}, {1, 1, 1, 1}};
  CHECK(occ::select_threshold(all_pos) <= -3.0);

  occ::ScoredSet none{{0.4, 0.2}, {0, 0}};
  try {
    occ::select_threshold(none);
    FAIL("no error");
  } catch (const occ::Error& e) {
    CHECK(e.code() == occ::ErrorCode::kNoPositives);
  }
}

TEST_CASE("select_threshold is near the exhaustive optimum and beats the default cut") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const auto s = random_set(rng, 500, 1.2, rep % 3 == 0);
    const double tau = occ::select_threshold(s);
    const double f1 = occ::compute_metrics(s, tau).f1;
    const double best = oracle::sweep_best_f1(s.scores, s.labels);
    // Every open candidate gap holds at most m samples; each flipped sample moves F1 by at most 2/P.
    const auto cand = occ::threshold_candidates(s.scores);
    std::size_t m = 0;
    for (std::size_t k = 0; k + 1 < cand.size(); ++k)
      m = std::max<std::size_t>(m, static_cast<std::size_t>(std::count_if(
                                       s.scores.begin(), s.scores.end(),
                                       [&](double v) { return v > cand[k] && v < cand[k + 1]; })));
    const double positives = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), 1));
    CHECK(f1 <= best + 1e-12);
    CHECK(best - f1 <= 2.0 * static_cast<double>(m) / positives);
    CHECK(f1 >= oracle::f1_at(s.scores, s.labels, 0.0) - 1e-12);
  }
}

TEST_CASE("percentiles interpolate linearly") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(occ::percentile_sorted(v, 0.0) == 1.0);
  CHECK(occ::percentile_sorted(v, 50.0) == 3.0);
  CHECK(occ::percentile_sorted(v, 62.5) == doctest::Approx(3.5));
  CHECK(occ::percentile_sorted(v, 100.0) == 5.0);
  const auto c = occ::threshold_candidates(v);
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(c.front() == 1.0);
  CHECK(c.back() == 5.0);
}

TEST_CASE("report serializations") {
  occ::ScoredSet s{{0.9, 0.1, 0.6}, {1, 0, 0}};
  const auto r = occ::compute_metrics(s, 0.5);
  const auto j = occ::to_json(r);
  CHECK(j.contains("f1"));
  CHECK(j.contains("confusion"));
  const auto header = occ::report_csv_header();
  const auto row = occ::report_csv_row(r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}
