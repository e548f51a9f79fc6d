// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/lstm.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "occ/binio.hpp"
#include "occ/error.hpp"
#include "occ/evalkit.hpp"
#include "occ/kernels.hpp"
#include "occ/parallel.hpp"

namespace occ {
namespace {

template <typename P, typename F>
void visit_tensors(P& p, F&& fn) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    fn(fmt::format("lstm.{}.wx", l), p.layers[l].wx);
    fn(fmt::format("lstm.{}.wh", l), p.layers[l].wh);
    fn(fmt::format("lstm.{}.b", l), p.layers[l].b);
  }
  fn(std::string("attention.w"), p.attention.w);
  fn(std::string("attention.v"), p.attention.v);
  fn(std::string("layer_norm.gain"), p.ln_gain);
  fn(std::string("layer_norm.bias"), p.ln_bias);
  fn(std::string("head.w1"), p.w1);
  fn(std::string("head.b1"), p.b1);
  fn(std::string("head.w2"), p.w2);
  fn(std::string("head.b2"), p.b2);
  fn(std::string("head.w_out"), p.w_out);
  fn(std::string("head.b_out"), p.b_out);
}

template <typename Derived>
void fill_uniform(Eigen::PlainObjectBase<Derived>& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
}

// Stable -[w y log s(z) + (1-y) log(1 - s(z))].
double bce_from_logit(double logit, std::uint8_t y, double w) {
  return y ? w * kernels::softplus(-logit) : kernels::softplus(logit);
}

double global_norm(LstmParams& g) {
  double s = 0.0;
  visit_tensors(g, [&](const std::string&, auto& t) { s += t.squaredNorm(); });
  return std::sqrt(s);
}

struct AdamState {
  LstmParams m, v;
  std::int64_t step = 0;
};

void adam_update(LstmParams& params, LstmParams& grad, AdamState& st, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.step;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  std::vector<double*> pd, gd, md, vd;
  std::vector<Eigen::Index> sizes;
  visit_tensors(params, [&](const std::string&, auto& t) {
    pd.push_back(t.data());
    sizes.push_back(t.size());
  });
  visit_tensors(grad, [&](const std::string&, auto& t) { gd.push_back(t.data()); });
  visit_tensors(st.m, [&](const std::string&, auto& t) { md.push_back(t.data()); });
  visit_tensors(st.v, [&](const std::string&, auto& t) { vd.push_back(t.data()); });
  for (std::size_t k = 0; k < pd.size(); ++k) {
    for (Eigen::Index i = 0; i < sizes[k]; ++i) {
      const double g = gd[k][i];
      md[k][i] = b1 * md[k][i] + (1.0 - b1) * g;
      vd[k][i] = b2 * vd[k][i] + (1.0 - b2) * g * g;
      pd[k][i] -= lr * (md[k][i] / c1) / (std::sqrt(vd[k][i] / c2) + eps);
    }
  }
}

double positive_weight(const FeatureTable& table, const WindowSet& windows, const LstmConfig& config) {
  double pos = 0.0;
  for (auto e : windows.ends) pos += table.y[e];
  const double neg = static_cast<double>(windows.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(ErrorCode::kSingleClassTraining, "LSTM training windows hold one class");
  return config.pos_weight ? *config.pos_weight : neg / pos;
}

// One pass over the shuffled training windows; returns mean batch loss.
double run_epoch(LstmModel& model, const FeatureTable& table, const WindowSet& train, double pos_weight, double lr,
                 std::vector<std::size_t>& order, AdamState& adam, std::mt19937_64& rng) {
  std::shuffle(order.begin(), order.end(), rng);
  const auto batch = static_cast<std::size_t>(model.config.batch_size);
  double total = 0.0;
  std::size_t seen = 0;
  LstmTape tape;
  std::vector<std::uint8_t> labels;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t stop = std::min(order.size(), start + batch);
    const std::span<const std::size_t> idx(order.data() + start, stop - start);
    const auto inputs = gather_inputs(table, train, idx);
    labels.clear();
    for (auto k : idx) labels.push_back(table.y[train.ends[k]]);
    lstm_forward_batch(model, inputs, true, &rng, tape);
    LstmParams grad = model.params.zeros_like();
    const double loss = lstm_backward_batch(model, tape, labels, pos_weight, grad);
    if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFiniteLoss, "LSTM loss diverged");
    if (model.config.grad_clip > 0.0) {
      const double norm = global_norm(grad);
      if (!std::isfinite(norm)) throw Error(ErrorCode::kNonFiniteLoss, "LSTM gradient diverged");
      if (norm > model.config.grad_clip) {
        const double scale = model.config.grad_clip / norm;
        visit_tensors(grad, [&](const std::string&, auto& t) { t *= scale; });
      }
    }
    adam_update(model.params, grad, adam, lr);
    total += loss * static_cast<double>(idx.size());
    seen += idx.size();
  }
  return total / static_cast<double>(seen);
}

}  // namespace

void LstmConfig::validate() const {
  if (hidden_dim < 1 || num_layers < 1 || seq_len < 1 || !(dropout > 0.0 && dropout < 1.0) ||
      !(learning_rate > 0.0) || batch_size < 1 || max_epochs < 1 || patience < 0 || train_stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid LSTM configuration");
  }
}

LstmParams LstmParams::zeros_like() const {
  LstmParams z = *this;
  visit_tensors(z, [](const std::string&, auto& t) { t.setZero(); });
  return z;
}

void LstmParams::for_each(const std::function<void(const std::string&, double*, Eigen::Index, Eigen::Index)>& fn) {
  visit_tensors(*this, [&](const std::string& name, auto& t) { fn(name, t.data(), t.rows(), t.cols()); });
}

std::size_t LstmParams::parameter_count() const {
  std::size_t n = 0;
  visit_tensors(const_cast<LstmParams&>(*this), [&](const std::string&, auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

LstmModel lstm_init(const LstmConfig& config, int input_width, std::uint64_t seed) {
  config.validate();
  if (input_width < 1) throw Error(ErrorCode::kShapeMismatch, "LSTM input width must be positive");
  LstmModel m;
  m.config = config;
  m.input_width = input_width;
  std::mt19937_64 rng(seed);
  const int H = config.hidden_dim;
  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(H));
  for (int l = 0; l < config.num_layers; ++l) {
    nn::LstmLayerParams p;
    p.wx.resize(4 * H, l == 0 ? input_width : H);
    p.wh.resize(4 * H, H);
    fill_uniform(p.wx, gate_bound, rng);
    fill_uniform(p.wh, gate_bound, rng);
    p.b = Vector::Zero(4 * H);
    p.b.segment(H, H).setOnes();
    m.params.layers.push_back(std::move(p));
  }
  auto& P = m.params;
  P.attention.w.resize(H, H);
  P.attention.v.resize(H);
  fill_uniform(P.attention.w, gate_bound, rng);
  fill_uniform(P.attention.v, gate_bound, rng);
  P.ln_gain = Vector::Ones(H);
  P.ln_bias = Vector::Zero(H);
  P.w1.resize(kHeadWidth1, H);
  P.b1.resize(kHeadWidth1);
  fill_uniform(P.w1, gate_bound, rng);
  fill_uniform(P.b1, gate_bound, rng);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(kHeadWidth1));
  P.w2.resize(kHeadWidth2, kHeadWidth1);
  P.b2.resize(kHeadWidth2);
  fill_uniform(P.w2, b2, rng);
  fill_uniform(P.b2, b2, rng);
  const double b3 = 1.0 / std::sqrt(static_cast<double>(kHeadWidth2));
  P.w_out.resize(kHeadWidth2);
  P.b_out.resize(1);
  fill_uniform(P.w_out, b3, rng);
  fill_uniform(P.b_out, b3, rng);
  return m;
}

void lstm_forward_batch(const LstmModel& model, const nn::Sequence& inputs, bool train_mode, std::mt19937_64* rng,
                        LstmTape& tape) {
  if (inputs.size() != static_cast<std::size_t>(model.config.seq_len) || inputs.front().rows() != model.input_width) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("LSTM expects {}x{} windows, got {}x{}", model.input_width, model.config.seq_len,
                            inputs.front().rows(), inputs.size()));
  }
  const bool drop = train_mode && model.config.dropout > 0.0;
  if (drop && rng == nullptr) throw Error(ErrorCode::kInvalidArgument, "train-mode forward needs an rng");
  const auto& P = model.params;
  const std::size_t n_layers = P.layers.size();
  tape.layers.resize(n_layers);
  tape.dropout_masks.assign(n_layers, nn::Sequence());
  nn::Sequence x = inputs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    nn::Sequence h = nn::lstm_layer_forward(P.layers[l], x, tape.layers[l]);
    if (drop) {
      auto& masks = tape.dropout_masks[l];
      for (auto& hk : h) {
        masks.push_back(nn::dropout_mask(hk.rows(), hk.cols(), model.config.dropout, *rng));
        hk = hk.cwiseProduct(masks.back());
      }
    }
    x = std::move(h);
  }
  tape.context = nn::attention_forward(P.attention, x, tape.attention);
  tape.normalized = nn::layer_norm_forward(tape.context, P.ln_gain, P.ln_bias, tape.layer_norm);
  tape.a1 = nn::dense_forward(P.w1, P.b1, tape.normalized);
  tape.z1 = nn::relu(tape.a1);
  if (drop) {
    tape.z1_mask = nn::dropout_mask(tape.z1.rows(), tape.z1.cols(), model.config.dropout, *rng);
    tape.z1_dropped = tape.z1.cwiseProduct(tape.z1_mask);
  } else {
    tape.z1_mask.resize(0, 0);
    tape.z1_dropped = tape.z1;
  }
  tape.a2 = nn::dense_forward(P.w2, P.b2, tape.z1_dropped);
  tape.z2 = nn::relu(tape.a2);
  tape.logits = (P.w_out.transpose() * tape.z2).array() + P.b_out[0];
  tape.probabilities = tape.logits.unaryExpr([](double s) { return kernels::sigmoid(s); });
}

double lstm_backward_batch(const LstmModel& model, const LstmTape& tape, std::span<const std::uint8_t> labels,
                           double pos_weight, LstmParams& grad) {
  const auto B = static_cast<Eigen::Index>(labels.size());
  if (B != tape.logits.size()) throw Error(ErrorCode::kShapeMismatch, "label count differs from batch size");
  const auto& P = model.params;
  Eigen::RowVectorXd ds(B);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto y = labels[static_cast<std::size_t>(b)];
    loss += bce_from_logit(tape.logits[b], y, pos_weight);
    ds[b] = weighted_bce_logit_grad(tape.probabilities[b], y, pos_weight) / static_cast<double>(B);
  }
  loss /= static_cast<double>(B);

  grad.w_out.noalias() += tape.z2 * ds.transpose();
  grad.b_out[0] += ds.sum();
  const Matrix dz2 = P.w_out * ds;
  const Matrix da2 = nn::relu_backward(tape.a2, dz2);
  Matrix dz1 = nn::dense_backward(P.w2, tape.z1_dropped, da2, grad.w2, grad.b2);
  if (tape.z1_mask.size() > 0) dz1 = dz1.cwiseProduct(tape.z1_mask);
  const Matrix da1 = nn::relu_backward(tape.a1, dz1);
  const Matrix dnorm = nn::dense_backward(P.w1, tape.normalized, da1, grad.w1, grad.b1);
  const Matrix dctx = nn::layer_norm_backward(tape.layer_norm, P.ln_gain, dnorm, grad.ln_gain, grad.ln_bias);
  nn::Sequence dh = nn::attention_backward(P.attention, tape.attention, dctx, grad.attention);
  for (std::size_t l = P.layers.size(); l-- > 0;) {
    const auto& masks = tape.dropout_masks[l];
    if (!masks.empty())
      for (std::size_t k = 0; k < dh.size(); ++k) dh[k] = dh[k].cwiseProduct(masks[k]);
    dh = nn::lstm_layer_backward(P.layers[l], tape.layers[l], dh, grad.layers[l]);
  }
  return loss;
}

LstmOutput lstm_forward(const LstmModel& model, const RowMatrix& window, bool train_mode, std::mt19937_64* rng) {
  if (window.rows() != model.input_width || window.cols() != model.config.seq_len) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("LSTM expects {}x{} windows, got {}x{}", model.input_width, model.config.seq_len,
                            window.rows(), window.cols()));
  }
  nn::Sequence inputs;
  for (Eigen::Index k = 0; k < window.cols(); ++k) inputs.emplace_back(window.col(k));
  LstmTape tape;
  lstm_forward_batch(model, inputs, train_mode, rng, tape);
  LstmOutput out;
  out.logit = tape.logits[0];
  out.probability = tape.probabilities[0];
  out.attention.assign(tape.attention.weights.data(), tape.attention.weights.data() + tape.attention.weights.rows());
  return out;
}

double weighted_bce(double prob, std::uint8_t label, double pos_weight) {
  const double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
  return label ? -pos_weight * std::log(p) : -std::log(1.0 - p);
}

double weighted_bce_logit_grad(double prob, std::uint8_t label, double pos_weight) {
  return label ? pos_weight * (prob - 1.0) : prob;
}

nn::Sequence gather_inputs(const FeatureTable& table, const WindowSet& windows, std::span<const std::size_t> idx) {
  const auto L = windows.seq_len;
  const auto B = static_cast<Eigen::Index>(idx.size());
  nn::Sequence inputs(L, Matrix(table.width(), B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const std::size_t first = windows.ends[idx[static_cast<std::size_t>(b)]] + 1 - L;
    for (std::size_t k = 0; k < L; ++k) inputs[k].col(b) = table.x.row(static_cast<Eigen::Index>(first + k)).transpose();
  }
  return inputs;
}

std::vector<double> lstm_predict(const LstmModel& model, const FeatureTable& table, const WindowSet& windows) {
  if (windows.seq_len != static_cast<std::size_t>(model.config.seq_len) || table.width() != model.input_width) {
    throw Error(ErrorCode::kShapeMismatch, "windows do not match the LSTM input shape");
  }
  constexpr std::size_t kChunk = 512;
  const std::size_t n = windows.size();
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> out(n);
  OccPragmaOmp(parallel for schedule(dynamic))
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk, hi = std::min(n, lo + kChunk);
    std::vector<std::size_t> idx(hi - lo);
    std::iota(idx.begin(), idx.end(), lo);
    LstmTape tape;
    lstm_forward_batch(model, gather_inputs(table, windows, idx), false, nullptr, tape);
    for (std::size_t k = lo; k < hi; ++k) out[k] = tape.probabilities[static_cast<Eigen::Index>(k - lo)];
  }
  return out;
}

LstmTrainResult lstm_train(const FeatureTable& table, const WindowSet& train, const WindowSet& val,
                           const LstmConfig& config) {
  config.validate();
  if (train.seq_len != static_cast<std::size_t>(config.seq_len) || val.seq_len != train.seq_len) {
    throw Error(ErrorCode::kShapeMismatch, "window length differs from config.seq_len");
  }
  const double pos_weight = positive_weight(table, train, config);
  std::mt19937_64 rng(config.seed);
  LstmTrainResult result;
  LstmModel model = lstm_init(config, table.width(), config.seed);
  model.mask = table.mask;
  AdamState adam{model.params.zeros_like(), model.params.zeros_like(), 0};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::uint8_t> val_labels;
  for (auto e : val.ends) val_labels.push_back(table.y[e]);

  double lr = config.learning_rate;
  double best_auc = -std::numeric_limits<double>::infinity();
  LstmParams best = model.params;
  int wait = 0, plateau = 0;
  const int plateau_limit = config.patience / 2;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double loss = run_epoch(model, table, train, pos_weight, lr, order, adam, rng);
    const auto probs = lstm_predict(model, table, val);
    const double auc = auc_roc(probs, val_labels);
    result.trace.push_back({epoch, loss, auc, lr});
    spdlog::debug("lstm epoch {} loss {:.5f} val_auc {:.5f} lr {:.2e}", epoch, loss, auc, lr);
    if (auc > best_auc) {
      best_auc = auc;
      best = model.params;
      result.best_epoch = epoch;
      wait = 0;
      plateau = 0;
    } else {
      ++wait;
      ++plateau;
      if (plateau_limit >= 1 && plateau >= plateau_limit) {
        lr *= 0.5;
        plateau = 0;
      }
    }
    if (wait >= config.patience) break;
  }
  model.params = std::move(best);
  result.model = std::move(model);
  result.best_val_auc = best_auc;
  return result;
}

LstmTrainResult lstm_train_epochs(const FeatureTable& table, const WindowSet& train, const LstmConfig& config,
                                  int epochs) {
  config.validate();
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epoch budget must be positive");
  const double pos_weight = positive_weight(table, train, config);
  std::mt19937_64 rng(config.seed);
  LstmTrainResult result;
  LstmModel model = lstm_init(config, table.width(), config.seed);
  model.mask = table.mask;
  AdamState adam{model.params.zeros_like(), model.params.zeros_like(), 0};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const double loss = run_epoch(model, table, train, pos_weight, config.learning_rate, order, adam, rng);
    result.trace.push_back({epoch, loss, std::numeric_limits<double>::quiet_NaN(), config.learning_rate});
  }
  result.best_epoch = epochs;
  result.model = std::move(model);
  return result;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
}

GradCheckResult grad_check(const LstmModel& model, const RowMatrix& window, std::uint8_t label, double pos_weight,
                           double step) {
  nn::Sequence inputs;
  for (Eigen::Index k = 0; k < window.cols(); ++k) inputs.emplace_back(window.col(k));
  const std::uint8_t labels[1] = {label};
  LstmTape tape;
  lstm_forward_batch(model, inputs, false, nullptr, tape);
  LstmParams analytic = model.params.zeros_like();
  lstm_backward_batch(model, tape, labels, pos_weight, analytic);

  LstmModel probe = model;
  auto loss_at = [&]() {
    LstmTape t;
    lstm_forward_batch(probe, inputs, false, nullptr, t);
    return bce_from_logit(t.logits[0], label, pos_weight);
  };
  std::vector<double*> grads;
  analytic.for_each([&](const std::string&, double* d, Eigen::Index, Eigen::Index) { grads.push_back(d); });
  GradCheckResult res;
  std::size_t tensor = 0;
  probe.params.for_each([&](const std::string& name, double* d, Eigen::Index r, Eigen::Index c) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < r * c; ++i) {
      const double saved = d[i];
      d[i] = saved + step;
      const double up = loss_at();
      d[i] = saved - step;
      const double down = loss_at();
      d[i] = saved;
      worst = std::max(worst, relative_error(grads[tensor][i], (up - down) / (2.0 * step)));
    }
    res.per_tensor.emplace_back(name, worst);
    if (worst >= res.max_relative_error) {
      res.max_relative_error = worst;
      res.worst_tensor = name;
    }
    ++tensor;
  });
  return res;
}

void save_lstm(const std::filesystem::path& path, const LstmModel& model) {
  const auto& c = model.config;
  BinaryWriter w(path);
  w.magic("OCLS");
  w.put<std::uint32_t>(1);
  w.put<std::int32_t>(c.hidden_dim);
  w.put<std::int32_t>(c.num_layers);
  w.put<std::int32_t>(c.seq_len);
  w.put<std::int32_t>(model.input_width);
  w.put<double>(c.dropout);
  w.put<double>(c.learning_rate);
  w.put<std::int32_t>(c.batch_size);
  w.put<std::int32_t>(c.max_epochs);
  w.put<std::int32_t>(c.patience);
  w.put<double>(c.pos_weight.value_or(std::numeric_limits<double>::quiet_NaN()));
  w.put<std::uint64_t>(c.seed);
  w.put<std::int32_t>(c.train_stride);
  w.put<double>(c.grad_clip);
  w.put<std::uint32_t>(model.mask.bits());
  w.put<double>(model.threshold.value_or(std::numeric_limits<double>::quiet_NaN()));
  LstmParams params = model.params;
  std::uint32_t count = 0;
  params.for_each([&](const std::string&, double*, Eigen::Index, Eigen::Index) { ++count; });
  w.put<std::uint32_t>(count);
  params.for_each([&](const std::string& name, double* d, Eigen::Index r, Eigen::Index cc) {
    w.put_string(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cc));
    w.put_span(std::span<const double>(d, static_cast<std::size_t>(r * cc)));
  });
  w.close();
}

LstmModel load_lstm(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("OCLS");
  if (r.get<std::uint32_t>() != 1) throw Error(ErrorCode::kFormat, "unsupported LSTM checkpoint version");
  LstmConfig c;
  c.hidden_dim = r.get<std::int32_t>();
  c.num_layers = r.get<std::int32_t>();
  c.seq_len = r.get<std::int32_t>();
  const int width = r.get<std::int32_t>();
  c.dropout = r.get<double>();
  c.learning_rate = r.get<double>();
  c.batch_size = r.get<std::int32_t>();
  c.max_epochs = r.get<std::int32_t>();
  c.patience = r.get<std::int32_t>();
  if (const double pw = r.get<double>(); !std::isnan(pw)) c.pos_weight = pw;
  c.seed = r.get<std::uint64_t>();
  c.train_stride = r.get<std::int32_t>();
  c.grad_clip = r.get<double>();
  LstmModel m = lstm_init(c, width, 0);
  m.mask = FeatureMask(r.get<std::uint32_t>());
  if (const double tau = r.get<double>(); !std::isnan(tau)) m.threshold = tau;
  const auto count = r.get<std::uint32_t>();
  std::uint32_t seen = 0;
  m.params.for_each([&](const std::string& name, double* d, Eigen::Index rows, Eigen::Index cols) {
    if (seen++ >= count) throw Error(ErrorCode::kFormat, "checkpoint has too few tensors");
    const std::string stored = r.get_string();
    const auto sr = r.get<std::uint32_t>(), sc = r.get<std::uint32_t>();
    if (stored != name || sr != rows || sc != cols) {
      throw Error(ErrorCode::kFormat, fmt::format("checkpoint tensor '{}' ({}x{}) does not match '{}' ({}x{})",
                                                  stored, sr, sc, name, rows, cols));
    }
    r.get_span(std::span<double>(d, static_cast<std::size_t>(rows * cols)));
  });
  if (seen != count) throw Error(ErrorCode::kFormat, "checkpoint has extra tensors");
  return m;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<EpochTrace>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  out << "epoch,train_loss,val_auc,learning_rate\n";
  for (const auto& e : trace) out << fmt::format("{},{:.10g},{:.10g},{:.10g}\n", e.epoch, e.train_loss, e.val_auc, e.learning_rate);
}

}  // namespace occ
