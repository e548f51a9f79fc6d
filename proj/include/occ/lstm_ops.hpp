// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode building blocks for the attention LSTM.
//
// Each op has a forward that records what its backward needs in a cache, and
// a backward that takes the upstream gradient, accumulates parameter
// gradients and returns the gradient for its input. Activations are batched
// column-wise: a (features x batch) matrix per time step.

#ifndef OCC_LSTM_OPS_HPP
#define OCC_LSTM_OPS_HPP

#include <random>
#include <vector>

#include "occ/types.hpp"

namespace occ::nn {

using Sequence = std::vector<Matrix>;  // one (features x batch) matrix per step

// Gate rows are stacked [input; forget; candidate; output], each H rows.
struct LstmLayerParams {
  Matrix wx;  // 4H x in
  Matrix wh;  // 4H x H
  Vector b;   // 4H
};

struct LstmLayerCache {
  Sequence inputs;
  Sequence gates;  // activated gates, 4H x B
  Sequence cells;
  Sequence tanh_cells;
  Sequence hidden;
};

Sequence lstm_layer_forward(const LstmLayerParams& p, const Sequence& inputs, LstmLayerCache& cache);
// d_hidden[k] is the gradient w.r.t. hidden state k; returns d_inputs.
Sequence lstm_layer_backward(const LstmLayerParams& p, const LstmLayerCache& cache, const Sequence& d_hidden,
                             LstmLayerParams& grad);

struct AttentionParams {
  Matrix w;  // H x H
  Vector v;  // H
};

struct AttentionCache {
  Sequence hidden;
  Sequence projected;  // tanh(W h_k)
  Matrix weights;      // L x B, softmax over rows for each column
};

// Scores e_k = v' tanh(W h_k), weights softmax over k, context sum_k w_k h_k.
Matrix attention_forward(const AttentionParams& p, const Sequence& hidden, AttentionCache& cache);
Sequence attention_backward(const AttentionParams& p, const AttentionCache& cache, const Matrix& d_context,
                            AttentionParams& grad);

// Column-wise softmax of an (L x B) score matrix, max-shifted.
Matrix softmax_columns(const Matrix& scores);

struct LayerNormCache {
  Matrix normalized;  // pre-affine, zero mean / unit variance per column
  Vector inv_std;     // per column
  Vector floored;     // 1 where the variance hit the eps floor
};

// Variance floor: columns are scaled by 1 / sqrt(max(var, eps)).
inline constexpr double kLayerNormEps = 1e-10;

Matrix layer_norm_forward(const Matrix& x, const Vector& gain, const Vector& bias, LayerNormCache& cache,
                          double eps = kLayerNormEps);
Matrix layer_norm_backward(const LayerNormCache& cache, const Vector& gain, const Matrix& d_out, Vector& d_gain,
                           Vector& d_bias);

// y = W x + b (bias broadcast over columns).
Matrix dense_forward(const Matrix& w, const Vector& b, const Matrix& x);
Matrix dense_backward(const Matrix& w, const Matrix& x, const Matrix& d_out, Matrix& d_w, Vector& d_b);

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& pre_activation, const Matrix& d_out);

// Inverted dropout mask: entries 0 or 1/(1-p).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng);

}  // namespace occ::nn

#endif  // OCC_LSTM_OPS_HPP
