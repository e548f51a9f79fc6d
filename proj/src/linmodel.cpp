// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/linmodel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "occ/error.hpp"
#include "occ/kernels.hpp"

namespace occ {
namespace {

int continuous_count(FeatureMask mask) {
  int k = 0;
  for (int j = 0; j < kNumContinuous; ++j) k += mask.has(static_cast<Feature>(j));
  return k;
}

// Hessian^+ grad of the normalized objective. Unused one-hot columns give
// zero rows, so a rank-revealing solve is used.
Vector newton_direction(const RowMatrix& x, std::span<const double> w, const Vector& theta, int n_continuous,
                        double l2, const Vector& grad) {
  const Vector s = x * theta;
  Vector d(s.size());
  double wsum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = kernels::sigmoid(s[i]);
    d[i] = w[static_cast<std::size_t>(i)] * p * (1.0 - p);
    wsum += w[static_cast<std::size_t>(i)];
  }
  Matrix h = x.transpose() * d.asDiagonal() * x / wsum;
  h.diagonal().head(n_continuous).array() += l2;
  return h.completeOrthogonalDecomposition().solve(grad);
}

}  // namespace

ClassWeights ClassWeights::balanced(std::span<const std::uint8_t> labels) {
  double pos = 0.0;
  for (auto y : labels) pos += y;
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(ErrorCode::kSingleClassTraining, "class weights need both classes");
  return {neg / pos, 1.0};
}

Vector LRModel::theta() const {
  Vector t(width());
  t << beta, alpha;
  return t;
}

double lr_predict_proba(const LRModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.width()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("LR expects {} features, got {}", model.width(), x.size()));
  }
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const double s = xv.dot(model.theta());
  // Clamp keeps the probability strictly inside (0, 1) in double precision.
  return kernels::sigmoid(std::clamp(s, -35.0, 35.0));
}

std::vector<double> lr_predict_proba(const LRModel& model, const RowMatrix& x) {
  if (x.cols() != model.width()) throw Error(ErrorCode::kDimensionMismatch, "LR feature width mismatch");
  const Vector s = x * model.theta();
  std::vector<double> p(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) p[static_cast<std::size_t>(i)] = kernels::sigmoid(std::clamp(s[i], -35.0, 35.0));
  return p;
}

double lr_objective(const RowMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                    const Vector& theta, int n_continuous, double l2, Vector* grad) {
  double wsum = 0.0;
  for (double v : w) wsum += v;
  double loss = kernels::weighted_logistic(x, y, w, theta, grad) / wsum;
  const auto beta = theta.head(n_continuous);
  loss += 0.5 * l2 * beta.squaredNorm();
  if (grad) {
    *grad /= wsum;
    grad->head(n_continuous) += l2 * beta;
  }
  return loss;
}

LRModel lr_fit(const FeatureTable& table, IndexRange rows, ClassWeights weights, const LrOptions& opt,
               LrFitInfo* info) {
  if (rows.empty() || rows.end > table.rows()) throw Error(ErrorCode::kInvalidArgument, "bad LR training range");
  const auto b = static_cast<Eigen::Index>(rows.begin), n = static_cast<Eigen::Index>(rows.size());
  const RowMatrix x = table.x.middleRows(b, n);
  const std::span<const std::uint8_t> y(table.y.data() + rows.begin, rows.size());
  std::size_t pos = 0;
  for (auto v : y) pos += v;
  if (pos == 0 || pos == y.size()) throw Error(ErrorCode::kSingleClassTraining, "LR training rows hold one class");

  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] ? weights.pos : weights.neg;

  const int k = continuous_count(table.mask);
  Vector theta = Vector::Zero(table.width());
  Vector grad, next_grad;
  double f = lr_objective(x, y, w, theta, k, opt.l2, &grad);
  LrFitInfo local;
  local.objective_trace.push_back(f);
  double step = opt.initial_step;
  Vector prev_theta, prev_grad;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (!std::isfinite(f)) throw Error(ErrorCode::kNonFiniteLoss, fmt::format("LR objective {} at iter {}", f, it));
    if (grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      local.converged = true;
      break;
    }
    // Barzilai-Borwein trial step, then Armijo backtracking along -grad.
    if (it > 0) {
      const Vector s = theta - prev_theta, g = grad - prev_grad;
      const double sg = s.dot(g);
      if (sg > 0.0) step = std::clamp(s.squaredNorm() / sg, 1e-10, 1e6);
    }
    const double g2 = grad.squaredNorm();
    Vector candidate;
    double f_new = 0.0;
    if (f - opt.armijo * step * g2 == f) {
      // The sufficient decrease is below the rounding of f, so Armijo cannot
      // tell progress from noise. Refine with Newton steps judged on the gradient.
      candidate = theta - newton_direction(x, w, theta, k, opt.l2, grad);
      f_new = lr_objective(x, y, w, candidate, k, opt.l2, &next_grad);
      if (!(f_new <= f) || next_grad.squaredNorm() >= g2) break;
    } else {
      while (true) {
        candidate = theta - step * grad;
        f_new = lr_objective(x, y, w, candidate, k, opt.l2, &next_grad);
        if (std::isfinite(f_new) && f_new <= f - opt.armijo * step * g2) break;
        step *= 0.5;
        if (step < 1e-20) break;
      }
      if (step < 1e-20) break;  // no descent possible at machine precision
    }
    prev_theta = std::move(theta);
    prev_grad = std::move(grad);
    theta = std::move(candidate);
    grad = next_grad;
    f = f_new;
    local.objective_trace.push_back(f);
  }
  if (!std::isfinite(f)) throw Error(ErrorCode::kNonFiniteLoss, "LR objective diverged");
  local.iterations = it;
  local.objective = f;
  local.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
  if (info) *info = std::move(local);

  LRModel m;
  m.mask = table.mask;
  m.l2 = opt.l2;
  m.beta = theta.head(k);
  m.alpha = theta.tail(table.width() - k);
  return m;
}

nlohmann::ordered_json standardizer_to_json(const Standardizer& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.stddev;
  j["degenerate"] = s.degenerate;
  return j;
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::array<double, kNumContinuous>>();
  s.stddev = j.at("std").get<std::array<double, kNumContinuous>>();
  s.degenerate = j.at("degenerate").get<std::array<bool, kNumContinuous>>();
  return s;
}

nlohmann::ordered_json lr_to_json(const LRModel& m, const Standardizer& standardizer) {
  nlohmann::ordered_json j;
  j["alpha"] = std::vector<double>(m.alpha.data(), m.alpha.data() + m.alpha.size());
  j["beta"] = std::vector<double>(m.beta.data(), m.beta.data() + m.beta.size());
  j["l2"] = m.l2;
  j["threshold"] = m.threshold ? nlohmann::ordered_json(*m.threshold) : nlohmann::ordered_json(nullptr);
  j["feature_mask"] = m.mask.names();
  j["standardizer"] = standardizer_to_json(standardizer);
  return j;
}

LRModel lr_from_json(const nlohmann::json& j, Standardizer* standardizer) {
  LRModel m;
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  m.alpha = Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  m.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  m.l2 = j.at("l2").get<double>();
  if (!j.at("threshold").is_null()) m.threshold = j.at("threshold").get<double>();
  m.mask = FeatureMask::from_names(j.at("feature_mask").get<std::vector<std::string>>());
  if (m.mask.width() != m.width()) throw Error(ErrorCode::kFormat, "LR mask does not match parameter count");
  if (standardizer) *standardizer = standardizer_from_json(j.at("standardizer"));
  return m;
}

}  // namespace occ
