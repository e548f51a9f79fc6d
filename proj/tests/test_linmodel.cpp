// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "occ/error.hpp"
#include "occ/linmodel.hpp"
#include "occ/lstm.hpp"
#include "oracles.hpp"

namespace {

// Continuous columns first, then four season columns with `season` hot.
occ::FeatureTable table_from(const std::vector<std::vector<double>>& cont, const std::vector<std::uint8_t>& y,
                             occ::FeatureMask mask, int season = 0) {
  occ::FeatureTable t;
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(cont.empty() ? 0 : cont.front().size());
  t.x = occ::RowMatrix::Zero(n, k + (mask.has(occ::Feature::kSeason) ? 4 : 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) t.x(i, j) = cont[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (mask.has(occ::Feature::kSeason)) t.x(i, k + season) = 1.0;
  }
  t.y = y;
  t.timestamps.resize(y.size());
  t.segment.assign(y.size(), 0);
  t.splits = {{0, y.size()}, {y.size(), y.size()}, {y.size(), y.size()}};
  t.mask = mask;
  return t;
}

occ::FeatureMask co2_and_season() {
  return occ::FeatureMask(0).with(occ::Feature::kCo2).with(occ::Feature::kSeason);
}

}  // namespace

TEST_CASE("lr_predict_proba basics") {
  occ::LRModel m;
  m.mask = co2_and_season();
  m.alpha = occ::Vector::Zero(4);
  m.beta = occ::Vector::Zero(1);
  const std::vector<double> x{3.7, 0, 1, 0, 0};
  CHECK(occ::lr_predict_proba(m, x) == 0.5);
  m.beta[0] = std::log(3.0);
  const std::vector<double> x1{1.0, 0, 0, 0, 0};
  CHECK(occ::lr_predict_proba(m, x1) == doctest::Approx(0.75).epsilon(1e-14));
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(occ::lr_predict_proba(m, bad), occ::Error);
}

TEST_CASE("lr_predict_proba matches the rearranged logit") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.5);
  occ::LRModel m;
  m.mask = occ::FeatureMask::all();
  m.beta = occ::Vector::NullaryExpr(4, [&](Eigen::Index) { return g(rng); });
  m.alpha = occ::Vector::NullaryExpr(4, [&](Eigen::Index) { return g(rng); });
  for (int p = 0; p < 5; ++p) {
    std::vector<double> x(8, 0.0);
    for (int j = 0; j < 4; ++j) x[static_cast<std::size_t>(j)] = 2.0 * g(rng);
    const int season = p % 4;
    x[static_cast<std::size_t>(4 + season)] = 1.0;
    double logit = m.alpha[season];
    for (int j = 0; j < 4; ++j) logit += m.beta[j] * x[static_cast<std::size_t>(j)];
    // ln(p/(1-p)) = logit  =>  p = e^logit / (1 + e^logit)
    const double expected = std::exp(logit) / (1.0 + std::exp(logit));
    CHECK(occ::lr_predict_proba(m, x) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("lr_objective gradient matches finite differences") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 30, k = 3;
    occ::RowMatrix x = occ::RowMatrix::Zero(n, k + 4);
    std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) x(i, j) = g(rng);
      x(i, k + i % 4) = 1.0;
      y[static_cast<std::size_t>(i)] = g(rng) > 0.0;
      w[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] ? 1.7 : 1.0;
    }
    const occ::Vector theta = occ::Vector::NullaryExpr(k + 4, [&](Eigen::Index) { return g(rng); });
    occ::Vector grad;
    occ::lr_objective(x, y, w, theta, static_cast<int>(k), 0.3, &grad);
    const auto numeric = oracle::central_difference(
        [&](const occ::Vector& t) { return occ::lr_objective(x, y, w, t, static_cast<int>(k), 0.3, nullptr); }, theta,
        1e-6);
    for (Eigen::Index i = 0; i < theta.size(); ++i) CHECK(occ::relative_error(grad[i], numeric[i]) < 1e-5);
  }
}

TEST_CASE("lr_fit separates separable one-dimensional data") {
  std::vector<std::vector<double>> cont;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 20; ++i) {
    cont.push_back({0.05 * i});
    y.push_back(0);
    cont.push_back({2.0 + 0.05 * i});
    y.push_back(1);
  }
  // A coarse grid over (alpha, beta) confirms a perfect separator exists.
  bool found = false;
  for (double a = -5.0; a <= 5.0 && !found; a += 0.25)
    for (double b = -5.0; b <= 5.0 && !found; b += 0.25) {
      bool ok = true;
      for (std::size_t i = 0; i < y.size() && ok; ++i) ok = ((a + b * cont[i][0] >= 0.0) == (y[i] == 1));
      found = ok;
    }
  REQUIRE(found);

  const auto t = table_from(cont, y, co2_and_season());
  occ::LrOptions opt;
  opt.l2 = 0.01;
  const auto m = occ::lr_fit(t, {0, y.size()}, {1.0, 1.0}, opt);
  const auto p = occ::lr_predict_proba(m, t.x);
  int correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += (p[i] >= 0.5) == (y[i] == 1);
  CHECK(correct == static_cast<int>(y.size()));
  CHECK_FALSE(m.threshold.has_value());
}

TEST_CASE("lr_fit invariances") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> cont;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 200; ++i) {
    const double a = g(rng), b = g(rng);
    cont.push_back({a, b});
    y.push_back(a - 0.5 * b + g(rng) > 0.0);
  }
  const auto mask = occ::FeatureMask(0).with(occ::Feature::kCo2).with(occ::Feature::kTIndoor).with(occ::Feature::kSeason);
  const auto t = table_from(cont, y, mask);
  occ::LrOptions opt;
  opt.grad_tol = 1e-13;
  const auto base = occ::lr_fit(t, {0, y.size()}, {1.0, 1.0}, opt);

  SUBCASE("duplicated rows") {
    auto cont2 = cont;
    cont2.insert(cont2.end(), cont.begin(), cont.end());
    auto y2 = y;
    y2.insert(y2.end(), y.begin(), y.end());
    const auto t2 = table_from(cont2, y2, mask);
    const auto dup = occ::lr_fit(t2, {0, y2.size()}, {1.0, 1.0}, opt);
    CHECK((dup.theta() - base.theta()).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("equal class weights") {
    const auto w = occ::lr_fit(t, {0, y.size()}, {2.5, 2.5}, opt);
    CHECK((w.theta() - base.theta()).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("objective never increases") {
    occ::LrFitInfo info;
    occ::lr_fit(t, {0, y.size()}, occ::ClassWeights::balanced(y), opt, &info);
    CHECK(info.converged);
    for (std::size_t i = 1; i < info.objective_trace.size(); ++i)
      CHECK(info.objective_trace[i] <= info.objective_trace[i - 1]);
  }
}

TEST_CASE("affine feature rescaling with matching parameters keeps predictions") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  occ::LRModel m;
  m.mask = occ::FeatureMask::all();
  m.beta = occ::Vector::NullaryExpr(4, [&](Eigen::Index) { return g(rng); });
  m.alpha = occ::Vector::NullaryExpr(4, [&](Eigen::Index) { return g(rng); });
  const std::array<double, 4> scale{2.0, 0.5, 10.0, 3.0}, shift{400.0, -21.0, 40.0, 0.1};
  occ::LRModel t = m;
  for (int j = 0; j < 4; ++j) {
    t.beta[j] = m.beta[j] / scale[static_cast<std::size_t>(j)];
    t.alpha.array() -= m.beta[j] * shift[static_cast<std::size_t>(j)] / scale[static_cast<std::size_t>(j)];
  }
  for (int p = 0; p < 20; ++p) {
    std::vector<double> x(8, 0.0), xs(8, 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
      x[j] = g(rng);
      xs[j] = scale[j] * x[j] + shift[j];
    }
    x[4 + p % 4] = xs[4 + p % 4] = 1.0;
    CHECK(std::abs(occ::lr_predict_proba(m, x) - occ::lr_predict_proba(t, xs)) < 1e-10);
  }
}

TEST_CASE("lr_fit errors and JSON round-trip") {
  const std::vector<std::vector<double>> cont{{0.0}, {1.0}, {2.0}};
  const auto single = table_from(cont, {1, 1, 1}, co2_and_season());
  CHECK_THROWS_AS(occ::lr_fit(single, {0, 3}, {1.0, 1.0}), occ::Error);
  CHECK_THROWS_AS(occ::ClassWeights::balanced(std::vector<std::uint8_t>{0, 0}), occ::Error);

  const auto w = occ::ClassWeights::balanced(std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(w.pos == 3.0);
  CHECK(w.neg == 1.0);

  const auto t = table_from(cont, {0, 1, 1}, co2_and_season());
  auto m = occ::lr_fit(t, {0, 3}, {1.0, 1.0});
  m.threshold = 0.42;
  occ::Standardizer st;
  st.mean = {400.0, 21.0, 40.0, 0.0};
  const auto j = occ::lr_to_json(m, st);
  occ::Standardizer st2;
  const auto back = occ::lr_from_json(nlohmann::json::parse(j.dump()), &st2);
  CHECK(back.theta() == m.theta());
  CHECK(back.threshold == m.threshold);
  CHECK(back.mask == m.mask);
  CHECK(st2 == st);
  CHECK(back.alpha.size() == 4);
}
