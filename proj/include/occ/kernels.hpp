// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops shared by the model modules.
//
// Every kernel exists twice: the default (OpenMP) version in occ::kernels and
// a plain loop in occ::kernels::serial. The serial versions are the reference
// the tests compare against and the baseline for bench_kernels. Reductions in
// the parallel versions use a fixed chunking independent of the thread count,
// so their results are reproducible run to run.

#ifndef OCC_KERNELS_HPP
#define OCC_KERNELS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

#include "occ/types.hpp"

namespace occ::kernels {

// Rows per partial sum in chunked reductions.
inline constexpr std::size_t kReduceChunk = 4096;

// out[t] = least-squares slope (units of y per second) of y over the trailing
// `window` samples ending at t, spaced dt seconds apart. Positions with fewer
// than two samples available get 0.
void trailing_slope(std::span<const double> y, std::size_t window, double dt, std::span<double> out);

// out[i] = exp(-gamma * ||X.row(i) - x||^2).
void rbf_row(const RowMatrix& X, std::span<const double> x, double gamma, std::span<double> out);

// out[i] = sum_j coef[j] * exp(-gamma * ||sv.row(j) - X.row(i)||^2) + bias.
void rbf_decision(const RowMatrix& sv, std::span<const double> coef, double bias, double gamma,
                  const RowMatrix& X, std::span<double> out);

// Weighted logistic negative log-likelihood, summed over rows:
//   sum_i w_i * [log(1 + exp(s_i)) - y_i s_i],   s_i = X.row(i) . theta
// Writes the gradient with respect to theta into grad when non-null.
double weighted_logistic(const RowMatrix& X, std::span<const std::uint8_t> y, std::span<const double> w,
                         const Vector& theta, Vector* grad);

// out[k] = positive-class F1 when predicting score >= taus[k].
void f1_at_thresholds(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::span<const double> taus, std::span<double> out);

namespace serial {

void trailing_slope(std::span<const double> y, std::size_t window, double dt, std::span<double> out);
void rbf_row(const RowMatrix& X, std::span<const double> x, double gamma, std::span<double> out);
void rbf_decision(const RowMatrix& sv, std::span<const double> coef, double bias, double gamma,
                  const RowMatrix& X, std::span<double> out);
double weighted_logistic(const RowMatrix& X, std::span<const std::uint8_t> y, std::span<const double> w,
                         const Vector& theta, Vector* grad);
void f1_at_thresholds(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::span<const double> taus, std::span<double> out);

}  // namespace serial

// log(1 + exp(s)) without overflow.
inline double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace occ::kernels

#endif  // OCC_KERNELS_HPP
