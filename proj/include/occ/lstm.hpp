// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_LSTM_HPP
#define OCC_LSTM_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "occ/features.hpp"
#include "occ/lstm_ops.hpp"
#include "occ/types.hpp"

namespace occ {

inline constexpr int kHeadWidth1 = 32;
inline constexpr int kHeadWidth2 = 16;

struct LstmConfig {
  int hidden_dim = 32;
  int num_layers = 1;
  int seq_len = 20;
  double dropout = 0.1;
  double learning_rate = 3e-3;
  int batch_size = 64;
  int max_epochs = 30;
  int patience = 8;
  std::optional<double> pos_weight;  // unset: N_neg / N_pos over train windows
  std::uint64_t seed = 0;
  int train_stride = 4;
  double grad_clip = 5.0;  // global-norm clip; <= 0 disables

  void validate() const;
};

// All trainable tensors. Doubles as the gradient / Adam-moment container.
struct LstmParams {
  std::vector<nn::LstmLayerParams> layers;
  nn::AttentionParams attention;
  Vector ln_gain, ln_bias;
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Vector w_out;
  Vector b_out;  // size 1

  // Same shapes, all zeros.
  LstmParams zeros_like() const;
  // Visits every tensor as (name, data, rows, cols) in a fixed order.
  void for_each(const std::function<void(const std::string&, double*, Eigen::Index, Eigen::Index)>& fn);
  std::size_t parameter_count() const;
};

struct LstmModel {
  LstmConfig config;
  int input_width = 0;
  FeatureMask mask = FeatureMask::all().without(Feature::kSeason);
  LstmParams params;
  std::optional<double> threshold;
};

LstmModel lstm_init(const LstmConfig& config, int input_width, std::uint64_t seed);

struct LstmOutput {
  double probability = 0.0;
  double logit = 0.0;
  std::vector<double> attention;  // length seq_len, sums to 1
};

// Single window (width x seq_len). Dropout only in train mode, drawn from rng.
LstmOutput lstm_forward(const LstmModel& model, const RowMatrix& window, bool train_mode,
                        std::mt19937_64* rng = nullptr);

// Everything a forward pass produced, for backward and for inspection.
struct LstmTape {
  std::vector<nn::LstmLayerCache> layers;
  std::vector<nn::Sequence> dropout_masks;  // per layer, empty in eval mode
  nn::AttentionCache attention;
  Matrix context;
  nn::LayerNormCache layer_norm;
  Matrix normalized;  // after affine
  Matrix a1, z1, z1_mask, z1_dropped, a2, z2;
  Eigen::RowVectorXd logits;
  Eigen::RowVectorXd probabilities;
};

// Batched forward over window inputs: inputs[k] is (width x B) for step k.
void lstm_forward_batch(const LstmModel& model, const nn::Sequence& inputs, bool train_mode, std::mt19937_64* rng,
                        LstmTape& tape);

// Gradient of mean weighted BCE over the batch; returns the loss.
double lstm_backward_batch(const LstmModel& model, const LstmTape& tape, std::span<const std::uint8_t> labels,
                           double pos_weight, LstmParams& grad);

// -[w y ln p + (1-y) ln(1-p)] with p clamped to [1e-12, 1-1e-12].
double weighted_bce(double prob, std::uint8_t label, double pos_weight);
// d loss / d logit for the sigmoid-BCE pair.
double weighted_bce_logit_grad(double prob, std::uint8_t label, double pos_weight);

// Gathers windows[idx] into per-step (width x B) input matrices.
nn::Sequence gather_inputs(const FeatureTable& table, const WindowSet& windows, std::span<const std::size_t> idx);

// Eval-mode probabilities for every window; chunks run in parallel.
std::vector<double> lstm_predict(const LstmModel& model, const FeatureTable& table, const WindowSet& windows);

struct EpochTrace {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  double learning_rate = 0.0;
};

struct LstmTrainResult {
  LstmModel model;
  std::vector<EpochTrace> trace;
  int best_epoch = 0;  // 1-based epoch whose parameters were kept
  double best_val_auc = 0.0;
};

// Adam + reduce-on-plateau + early stopping on validation AUC.
LstmTrainResult lstm_train(const FeatureTable& table, const WindowSet& train, const WindowSet& val,
                           const LstmConfig& config);

// Fixed epoch budget, no validation (final retrain on train+val).
LstmTrainResult lstm_train_epochs(const FeatureTable& table, const WindowSet& train, const LstmConfig& config,
                                  int epochs);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::vector<std::pair<std::string, double>> per_tensor;
};

// Analytic vs central finite differences (step 1e-5) for every parameter,
// dropout disabled.
GradCheckResult grad_check(const LstmModel& model, const RowMatrix& window, std::uint8_t label,
                           double pos_weight = 1.0, double step = 1e-5);

// Relative error used by all gradient checks: |a - n| / max(|a| + |n|, 1e-6).
double relative_error(double analytic, double numeric);

// "OCLS" magic, u32 version, config header, u32 mask bits, f64 threshold
// (NaN when unset), u32 tensor count, then per tensor: u32 name length,
// name bytes, u32 rows, u32 cols, rows*cols f64 column-major.
void save_lstm(const std::filesystem::path& path, const LstmModel& model);
LstmModel load_lstm(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path, const std::vector<EpochTrace>& trace);

}  // namespace occ

#endif  // OCC_LSTM_HPP
