// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "occ/parallel.hpp"

namespace occ::kernels {
namespace {

inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

inline double f1_from_counts(double tp, double fp, double fn) {
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

}  // namespace

void trailing_slope(std::span<const double> y, std::size_t window, double dt, std::span<double> out) {
  const auto n_total = static_cast<std::ptrdiff_t>(y.size());
  OccPragmaOmp(parallel for schedule(static))
  for (std::ptrdiff_t t = 0; t < n_total; ++t) {
    const std::ptrdiff_t first = std::max<std::ptrdiff_t>(0, t - static_cast<std::ptrdiff_t>(window) + 1);
    const auto n = static_cast<double>(t - first + 1);
    if (n < 2.0) {
      out[t] = 0.0;
      continue;
    }
    // Local abscissa k = 0..n-1 centred at (n-1)/2; sum of squares is closed form.
    const double centre = 0.5 * (n - 1.0);
    double sxy = 0.0;
    for (std::ptrdiff_t j = first; j <= t; ++j) sxy += (static_cast<double>(j - first) - centre) * y[j];
    const double sxx = n * (n * n - 1.0) / 12.0;
    out[t] = sxy / (sxx * dt);
  }
}

void rbf_row(const RowMatrix& X, std::span<const double> x, double gamma, std::span<double> out) {
  const Eigen::Index n = X.rows(), d = X.cols();
  OccPragmaOmp(parallel for schedule(static) if (n > 2048))
  for (Eigen::Index i = 0; i < n; ++i) out[i] = -gamma * squared_distance(X.row(i).data(), x.data(), d);
  // Separate pass so Eigen can vectorize exp.
  Eigen::Map<Eigen::ArrayXd> a(out.data(), n);
  a = a.exp();
}

void rbf_decision(const RowMatrix& sv, std::span<const double> coef, double bias, double gamma,
                  const RowMatrix& X, std::span<double> out) {
  // Tiled as ||x||^2 + ||s||^2 - 2 x.s so inner products go through GEMM and
  // each tile stays cache resident.
  constexpr Eigen::Index kRowBlock = 64, kSvBlock = 1024;
  const Eigen::Index n = X.rows(), m = sv.rows();
  const Vector sv_norm = sv.rowwise().squaredNorm();
  const Eigen::Map<const Vector> c(coef.data(), m);
  const Eigen::Index n_blocks = (n + kRowBlock - 1) / kRowBlock;
  OccPragmaOmp(parallel for schedule(dynamic))
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    const Eigen::Index lo = b * kRowBlock, rows = std::min(kRowBlock, n - lo);
    const auto xb = X.middleRows(lo, rows);
    const Vector x_norm = xb.rowwise().squaredNorm();
    Vector f = Vector::Zero(rows);
    Matrix g(rows, kSvBlock);
    for (Eigen::Index s0 = 0; s0 < m; s0 += kSvBlock) {
      const Eigen::Index cols = std::min(kSvBlock, m - s0);
      auto tile = g.leftCols(cols);
      tile.noalias() = xb * sv.middleRows(s0, cols).transpose();
      tile.array() = (((-2.0 * tile.array()).colwise() + x_norm.array()).rowwise() +
                      sv_norm.segment(s0, cols).transpose().array())
                         .max(0.0) *
                     -gamma;
      tile.array() = tile.array().exp();
      f.noalias() += tile * c.segment(s0, cols);
    }
    for (Eigen::Index i = 0; i < rows; ++i) out[static_cast<std::size_t>(lo + i)] = f[i] + bias;
  }
}

double weighted_logistic(const RowMatrix& X, std::span<const std::uint8_t> y, std::span<const double> w,
                         const Vector& theta, Vector* grad) {
  const auto n = static_cast<std::size_t>(X.rows());
  const Eigen::Index d = X.cols();
  const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> chunk_loss(n_chunks, 0.0);
  Matrix chunk_grad = Matrix::Zero(d, static_cast<Eigen::Index>(grad ? n_chunks : 0));

  OccPragmaOmp(parallel for schedule(static))
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    double loss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = X.row(static_cast<Eigen::Index>(i));
      const double s = row.dot(theta);
      loss += w[i] * (softplus(s) - y[i] * s);
      if (grad) chunk_grad.col(c).noalias() += (w[i] * (sigmoid(s) - y[i])) * row.transpose();
    }
    chunk_loss[c] = loss;
  }
  double loss = 0.0;
  for (double l : chunk_loss) loss += l;
  if (grad) {
    grad->setZero(d);
    for (std::size_t c = 0; c < n_chunks; ++c) *grad += chunk_grad.col(static_cast<Eigen::Index>(c));
  }
  return loss;
}

void f1_at_thresholds(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::span<const double> taus, std::span<double> out) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> sorted(n);
  // positives_above[k] = positives among order[k..n)
  std::vector<double> positives_above(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    sorted[k] = scores[order[k]];
    positives_above[k] = positives_above[k + 1] + labels[order[k]];
  }
  const double positives = positives_above[0];
  OccPragmaOmp(parallel for schedule(static))
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(taus.size()); ++k) {
    const auto first = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), taus[k]) - sorted.begin());
    const double predicted = static_cast<double>(n - first);
    const double tp = positives_above[first];
    out[k] = f1_from_counts(tp, predicted - tp, positives - tp);
  }
}

namespace serial {

void trailing_slope(std::span<const double> y, std::size_t window, double dt, std::span<double> out) {
  for (std::size_t t = 0; t < y.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    const std::size_t n = t - first + 1;
    if (n < 2) {
      out[t] = 0.0;
      continue;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t j = first; j <= t; ++j) {
      mx += static_cast<double>(j) * dt;
      my += y[j];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = first; j <= t; ++j) {
      const double dx = static_cast<double>(j) * dt - mx;
      sxy += dx * (y[j] - my);
      sxx += dx * dx;
    }
    out[t] = sxy / sxx;
  }
}

void rbf_row(const RowMatrix& X, std::span<const double> x, double gamma, std::span<double> out) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = std::exp(-gamma * squared_distance(X.row(i).data(), x.data(), X.cols()));
}

void rbf_decision(const RowMatrix& sv, std::span<const double> coef, double bias, double gamma,
                  const RowMatrix& X, std::span<double> out) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < sv.rows(); ++j)
      f += coef[j] * std::exp(-gamma * squared_distance(sv.row(j).data(), X.row(i).data(), X.cols()));
    out[i] = f + bias;
  }
}

double weighted_logistic(const RowMatrix& X, std::span<const std::uint8_t> y, std::span<const double> w,
                         const Vector& theta, Vector* grad) {
  double loss = 0.0;
  if (grad) grad->setZero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double s = X.row(i).dot(theta);
    loss += w[i] * (softplus(s) - y[i] * s);
    if (grad) *grad += (w[i] * (sigmoid(s) - y[i])) * X.row(i).transpose();
  }
  return loss;
}

void f1_at_thresholds(std::span<const double> scores, std::span<const std::uint8_t> labels,
                      std::span<const double> taus, std::span<double> out) {
  for (std::size_t k = 0; k < taus.size(); ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool pred = scores[i] >= taus[k];
      tp += pred && labels[i];
      fp += pred && !labels[i];
      fn += !pred && labels[i];
    }
    out[k] = f1_from_counts(tp, fp, fn);
  }
}

}  // namespace serial
}  // namespace occ::kernels
