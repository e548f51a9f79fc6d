// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_LINMODEL_HPP
#define OCC_LINMODEL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "occ/features.hpp"
#include "occ/types.hpp"

namespace occ {

struct ClassWeights {
  double pos = 1.0;
  double neg = 1.0;

  // w_pos = N_neg / N_pos, w_neg = 1 over the given labels.
  static ClassWeights balanced(std::span<const std::uint8_t> labels);
};

struct LrOptions {
  double l2 = 1e-4;
  int max_iters = 5000;
  double grad_tol = 1e-6;
  double initial_step = 1.0;
  double armijo = 1e-4;
};

// Logistic regression whose intercept is a per-season vector dotted with the
// season one-hot. Column order follows the table: continuous features first,
// then the four season columns.
struct LRModel {
  FeatureMask mask = FeatureMask::all();
  Vector alpha;  // one per season column (empty when the mask has no season)
  Vector beta;   // one per continuous feature
  double l2 = 1e-4;
  std::optional<double> threshold;

  int width() const { return static_cast<int>(alpha.size() + beta.size()); }
  Vector theta() const;
};

struct LrFitInfo {
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double grad_inf_norm = 0.0;
  std::vector<double> objective_trace;
};

double lr_predict_proba(const LRModel& model, std::span<const double> x);
std::vector<double> lr_predict_proba(const LRModel& model, const RowMatrix& x);

// Normalized weighted objective (1/sum w) sum w_i nll_i + (l2/2)||beta||^2 and
// its gradient over the stacked (beta, alpha) vector.
double lr_objective(const RowMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                    const Vector& theta, int n_continuous, double l2, Vector* grad);

LRModel lr_fit(const FeatureTable& table, IndexRange rows, ClassWeights weights, const LrOptions& options = {},
               LrFitInfo* info = nullptr);

nlohmann::ordered_json lr_to_json(const LRModel& model, const Standardizer& standardizer);
LRModel lr_from_json(const nlohmann::json& j, Standardizer* standardizer = nullptr);

nlohmann::ordered_json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace occ

#endif  // OCC_LINMODEL_HPP
