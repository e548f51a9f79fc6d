// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/lstm_ops.hpp"

#include <cmath>

namespace occ::nn {
namespace {

inline Matrix sigmoid(const Matrix& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

}  // namespace

Sequence lstm_layer_forward(const LstmLayerParams& p, const Sequence& inputs, LstmLayerCache& cache) {
  const Eigen::Index H = p.wh.cols();
  const Eigen::Index B = inputs.empty() ? 0 : inputs.front().cols();
  const std::size_t L = inputs.size();
  cache.inputs = inputs;
  cache.gates.assign(L, Matrix());
  cache.cells.assign(L, Matrix());
  cache.tanh_cells.assign(L, Matrix());
  cache.hidden.assign(L, Matrix());
  Matrix h = Matrix::Zero(H, B), c = Matrix::Zero(H, B);
  for (std::size_t k = 0; k < L; ++k) {
    Matrix a = p.wx * inputs[k];
    a.noalias() += p.wh * h;
    a.colwise() += p.b;
    Matrix gates(4 * H, B);
    gates.topRows(H) = sigmoid(a.topRows(H));
    gates.middleRows(H, H) = sigmoid(a.middleRows(H, H));
    gates.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh();
    gates.bottomRows(H) = sigmoid(a.bottomRows(H));
    c = gates.middleRows(H, H).cwiseProduct(c) + gates.topRows(H).cwiseProduct(gates.middleRows(2 * H, H));
    Matrix tc = c.array().tanh();
    h = gates.bottomRows(H).cwiseProduct(tc);
    cache.gates[k] = std::move(gates);
    cache.cells[k] = c;
    cache.tanh_cells[k] = std::move(tc);
    cache.hidden[k] = h;
  }
  return cache.hidden;
}

Sequence lstm_layer_backward(const LstmLayerParams& p, const LstmLayerCache& cache, const Sequence& d_hidden,
                             LstmLayerParams& grad) {
  const Eigen::Index H = p.wh.cols();
  const std::size_t L = cache.hidden.size();
  const Eigen::Index B = L == 0 ? 0 : cache.hidden.front().cols();
  Sequence d_inputs(L);
  Matrix dh_next = Matrix::Zero(H, B), dc_next = Matrix::Zero(H, B);
  Matrix da(4 * H, B);
  for (std::size_t k = L; k-- > 0;) {
    const Matrix& g = cache.gates[k];
    const auto gi = g.topRows(H).array(), gf = g.middleRows(H, H).array(), gg = g.middleRows(2 * H, H).array(),
               go = g.bottomRows(H).array();
    const auto tc = cache.tanh_cells[k].array();
    const Matrix dh = d_hidden[k] + dh_next;
    const Matrix dc = dc_next.array() + dh.array() * go * (1.0 - tc.square());
    const Matrix c_prev = k > 0 ? cache.cells[k - 1] : Matrix::Zero(H, B);
    da.topRows(H) = dc.array() * gg * gi * (1.0 - gi);
    da.middleRows(H, H) = dc.array() * c_prev.array() * gf * (1.0 - gf);
    da.middleRows(2 * H, H) = dc.array() * gi * (1.0 - gg.square());
    da.bottomRows(H) = dh.array() * tc * go * (1.0 - go);
    dc_next = dc.array() * gf;

    grad.wx.noalias() += da * cache.inputs[k].transpose();
    if (k > 0) grad.wh.noalias() += da * cache.hidden[k - 1].transpose();
    grad.b += da.rowwise().sum();
    d_inputs[k] = p.wx.transpose() * da;
    dh_next = p.wh.transpose() * da;
  }
  return d_inputs;
}

Matrix softmax_columns(const Matrix& scores) {
  Matrix out = scores.rowwise() - scores.colwise().maxCoeff();
  out = out.array().exp();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

Matrix attention_forward(const AttentionParams& p, const Sequence& hidden, AttentionCache& cache) {
  const std::size_t L = hidden.size();
  const Eigen::Index H = p.w.rows(), B = hidden.front().cols();
  cache.hidden = hidden;
  cache.projected.assign(L, Matrix());
  Matrix scores(static_cast<Eigen::Index>(L), B);
  for (std::size_t k = 0; k < L; ++k) {
    cache.projected[k] = (p.w * hidden[k]).array().tanh();
    scores.row(static_cast<Eigen::Index>(k)) = p.v.transpose() * cache.projected[k];
  }
  cache.weights = softmax_columns(scores);
  Matrix context = Matrix::Zero(H, B);
  for (std::size_t k = 0; k < L; ++k) {
    context.array() += hidden[k].array().rowwise() * cache.weights.row(static_cast<Eigen::Index>(k)).array();
  }
  return context;
}

Sequence attention_backward(const AttentionParams& p, const AttentionCache& cache, const Matrix& d_context,
                            AttentionParams& grad) {
  const std::size_t L = cache.hidden.size();
  const Eigen::Index B = d_context.cols();
  const auto Li = static_cast<Eigen::Index>(L);
  Matrix d_weights(Li, B);
  for (std::size_t k = 0; k < L; ++k) {
    d_weights.row(static_cast<Eigen::Index>(k)) = d_context.cwiseProduct(cache.hidden[k]).colwise().sum();
  }
  // Softmax Jacobian: de_k = w_k (dw_k - sum_j w_j dw_j).
  const Eigen::RowVectorXd inner = cache.weights.cwiseProduct(d_weights).colwise().sum();
  const Matrix d_scores = cache.weights.array() * (d_weights.rowwise() - inner).array();
  Sequence d_hidden(L);
  for (std::size_t k = 0; k < L; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    d_hidden[k] = d_context.array().rowwise() * cache.weights.row(ki).array();
    grad.v.noalias() += cache.projected[k] * d_scores.row(ki).transpose();
    const Matrix d_pre = (p.v * d_scores.row(ki)).array() * (1.0 - cache.projected[k].array().square());
    grad.w.noalias() += d_pre * cache.hidden[k].transpose();
    d_hidden[k].noalias() += p.w.transpose() * d_pre;
  }
  return d_hidden;
}

Matrix layer_norm_forward(const Matrix& x, const Vector& gain, const Vector& bias, LayerNormCache& cache,
                          double eps) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().sum() / n;
  Matrix centred = x.rowwise() - mean;
  const Eigen::RowVectorXd var = centred.array().square().colwise().sum() / n;
  cache.inv_std = var.array().max(eps).rsqrt().transpose();
  cache.floored = (var.array() <= eps).cast<double>().transpose();
  cache.normalized = centred.array().rowwise() * cache.inv_std.transpose().array();
  Matrix out = cache.normalized.array().colwise() * gain.array();
  out.colwise() += bias;
  return out;
}

Matrix layer_norm_backward(const LayerNormCache& cache, const Vector& gain, const Matrix& d_out, Vector& d_gain,
                           Vector& d_bias) {
  const auto n = static_cast<double>(d_out.rows());
  d_gain += d_out.cwiseProduct(cache.normalized).rowwise().sum();
  d_bias += d_out.rowwise().sum();
  const Matrix d_norm = d_out.array().colwise() * gain.array();
  const Eigen::RowVectorXd mean_d = d_norm.colwise().sum() / n;
  const Eigen::RowVectorXd mean_dx = d_norm.cwiseProduct(cache.normalized).colwise().sum() / n;
  Matrix d_x = d_norm.rowwise() - mean_d;
  // A floored column has a constant scale, so no gradient flows through its variance.
  d_x.array() -= cache.normalized.array().rowwise() * (mean_dx.array() * (1.0 - cache.floored.transpose().array()));
  d_x.array().rowwise() *= cache.inv_std.transpose().array();
  return d_x;
}

Matrix dense_forward(const Matrix& w, const Vector& b, const Matrix& x) {
  Matrix y = w * x;
  y.colwise() += b;
  return y;
}

Matrix dense_backward(const Matrix& w, const Matrix& x, const Matrix& d_out, Matrix& d_w, Vector& d_b) {
  d_w.noalias() += d_out * x.transpose();
  d_b += d_out.rowwise().sum();
  return w.transpose() * d_out;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& pre, const Matrix& d_out) {
  return (pre.array() > 0.0).select(d_out, 0.0);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - p);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng) >= p ? keep : 0.0;
  return m;
}

}  // namespace occ::nn
