// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Gaussian-process Bayesian optimization over a box of hyperparameters.
//
// Points are handled in two coordinate systems: natural units (what the
// objective sees) and the unit cube (what the GP sees, with log-scaled
// dimensions mapped in log space).

#ifndef OCC_HYPEROPT_HPP
#define OCC_HYPEROPT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "occ/types.hpp"

namespace occ {

enum class Scale { kLinear, kLog };
enum class DimKind { kContinuous, kInteger };

struct SearchDim {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::kLinear;
  DimKind kind = DimKind::kContinuous;
};

using Params = std::vector<double>;  // natural units, one per dim

struct SearchSpace {
  std::vector<SearchDim> dims;

  std::size_t size() const { return dims.size(); }
  void validate() const;
  Vector to_unit(const Params& lambda) const;
  // Clamps to the box and rounds integer dims.
  Params from_unit(const Vector& u) const;
  Params snap(const Params& lambda) const;
  bool contains(const Params& lambda) const;
  nlohmann::ordered_json describe(const Params& lambda) const;
  Params parse(const nlohmann::json& named) const;
};

SearchSpace svm_search_space();
SearchSpace lstm_search_space();

struct GpHyper {
  Vector length_scales;     // per dim, unit-cube coordinates
  double amplitude = 1.0;   // signal standard deviation
  double prior_mean = 0.0;
  double noise = 1e-6;      // variance added to the diagonal
};

// Matern-5/2: a^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r), r scaled by length.
double matern52(const Vector& a, const Vector& b, const GpHyper& hyper);

struct GpModel {
  Matrix x;  // n x d, unit cube
  Vector y;
  GpHyper hyper;
  Matrix chol_lower;  // of K + (noise + jitter) I
  Vector alpha;       // (K + ...)^-1 (y - prior_mean)
  double jitter = 0.0;
};

// Throws IllConditionedKernel when jitter escalation cannot make K positive definite.
GpModel gp_fit(const Matrix& x, const Vector& y, const GpHyper& hyper);

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

Posterior gp_posterior(const GpModel& gp, const Vector& query);

double log_marginal_likelihood(const GpModel& gp);

// Prior mean and amplitude from the data, noise floor 1e-6 relative to the
// amplitude, length scales by coordinate sweeps over a log grid.
GpHyper fit_gp_hyper(const Matrix& x, const Vector& y);

// Maximization form. std == 0 gives max(mean - best, 0).
double expected_improvement(double mean, double std, double best);

struct ObjectiveResult {
  double value = 0.0;
  nlohmann::ordered_json info = nlohmann::ordered_json::object();

  ObjectiveResult() = default;
  ObjectiveResult(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  ObjectiveResult(double v, nlohmann::ordered_json extra) : value(v), info(std::move(extra)) {}
};

using Objective = std::function<ObjectiveResult(const Params&)>;

struct Evaluation {
  Params lambda;
  double objective = 0.0;
  nlohmann::ordered_json info = nlohmann::ordered_json::object();
};

struct BOTrace {
  std::vector<Evaluation> evaluations;
  Params best_lambda;
  double best_objective = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  GpHyper hyper;  // surrogate state after the last fit

  const Evaluation& best() const { return evaluations.at(best_index); }
};

struct BoOptions {
  int n_init = 5;
  int n_iters = 20;
  std::uint64_t seed = 0;
  int n_candidates = 4096;
  int n_local = 512;
  double local_radius = 0.05;  // unit-cube std of incumbent perturbations
  // When set, every evaluation is appended here as one JSON line.
  std::optional<std::filesystem::path> trace_path;
};

Matrix latin_hypercube(int n, int d, std::uint64_t seed);

// Evaluations already present in `resume` are reused in order, not re-run.
BOTrace bo_optimize(const Objective& objective, const SearchSpace& space, const BoOptions& options,
                    const BOTrace* resume = nullptr);

nlohmann::ordered_json evaluation_to_json(const SearchSpace& space, const Evaluation& e, std::size_t index);
BOTrace load_trace_jsonl(const std::filesystem::path& path, const SearchSpace& space);

}  // namespace occ

#endif  // OCC_HYPEROPT_HPP
