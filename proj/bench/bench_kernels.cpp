// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to vary the
// thread count of the parallel versions.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "occ/kernels.hpp"

namespace {

struct Fixture {
  occ::RowMatrix x;
  std::vector<std::uint8_t> y;
  std::vector<double> w, series, scores, taus;
  occ::Vector theta;

  explicit Fixture(std::size_t n, Eigen::Index d = 8) : x(static_cast<Eigen::Index>(n), d), y(n), w(n, 1.0) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    for (auto& v : y) v = g(rng) > 0.0;
    theta = occ::Vector::NullaryExpr(d, [&](Eigen::Index) { return g(rng); });
    series.resize(n);
    double level = 600.0;
    for (auto& v : series) v = (level += g(rng));
    scores.resize(n);
    for (auto& v : scores) v = g(rng);
    for (int k = 0; k < 199; ++k) taus.push_back(-2.5 + 0.025 * k);
  }
};

const Fixture& fixture(std::size_t n) {
  static Fixture small(1 << 12), large(1 << 17);
  return n <= (1u << 12) ? small : large;
}

template <bool kParallel>
void BM_TrailingSlope(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.series.size());
  for (auto _ : state) {
    if constexpr (kParallel) occ::kernels::trailing_slope(f.series, 30, 30.0, out);
    else occ::kernels::serial::trailing_slope(f.series, 30, 30.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_RbfRow(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(static_cast<std::size_t>(f.x.rows()));
  const std::span<const double> q(f.x.row(0).data(), static_cast<std::size_t>(f.x.cols()));
  for (auto _ : state) {
    if constexpr (kParallel) occ::kernels::rbf_row(f.x, q, 0.1, out);
    else occ::kernels::serial::rbf_row(f.x, q, 0.1, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_RbfDecision(benchmark::State& state) {
  const auto& f = fixture(1 << 17);
  const occ::RowMatrix sv = f.x.topRows(2048);
  const std::vector<double> coef(2048, 0.5);
  const occ::RowMatrix q = f.x.bottomRows(state.range(0));
  std::vector<double> out(static_cast<std::size_t>(q.rows()));
  for (auto _ : state) {
    if constexpr (kParallel) occ::kernels::rbf_decision(sv, coef, 0.1, 0.1, q, out);
    else occ::kernels::serial::rbf_decision(sv, coef, 0.1, 0.1, q, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_WeightedLogistic(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  occ::Vector grad;
  for (auto _ : state) {
    double loss = kParallel ? occ::kernels::weighted_logistic(f.x, f.y, f.w, f.theta, &grad)
                            : occ::kernels::serial::weighted_logistic(f.x, f.y, f.w, f.theta, &grad);
    benchmark::DoNotOptimize(loss);
  }
}

template <bool kParallel>
void BM_F1AtThresholds(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.taus.size());
  for (auto _ : state) {
    if constexpr (kParallel) occ::kernels::f1_at_thresholds(f.scores, f.y, f.taus, out);
    else occ::kernels::serial::f1_at_thresholds(f.scores, f.y, f.taus, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_TrailingSlope<false>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_TrailingSlope<true>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_RbfRow<false>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_RbfRow<true>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_RbfDecision<false>)->Arg(1 << 10);
BENCHMARK(BM_RbfDecision<true>)->Arg(1 << 10);
BENCHMARK(BM_WeightedLogistic<false>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_WeightedLogistic<true>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_F1AtThresholds<false>)->Arg(1 << 12)->Arg(1 << 17);
BENCHMARK(BM_F1AtThresholds<true>)->Arg(1 << 12)->Arg(1 << 17);

BENCHMARK_MAIN();
