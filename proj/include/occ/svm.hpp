// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_SVM_HPP
#define OCC_SVM_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "occ/features.hpp"
#include "occ/linmodel.hpp"
#include "occ/types.hpp"

namespace occ {

struct SvmConfig {
  double c = 1.0;
  double gamma = 0.1;
  // C+ = c * pos, C- = c * neg. Unset means N_neg/N_pos and 1 over the
  // (subsampled) training rows.
  std::optional<ClassWeights> class_weights;
  std::size_t max_train_size = 100000;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  std::size_t cache_mb = 256;
  std::int64_t max_iter = 0;  // 0: max(10^7, 100 n)
};

struct SvmModel {
  RowMatrix support_vectors;
  Vector dual_coefs;  // alpha_t * y_t
  double bias = 0.0;
  double gamma = 0.1;
  std::optional<double> threshold;
  FeatureMask mask = FeatureMask::all();

  std::size_t n_support() const { return static_cast<std::size_t>(support_vectors.rows()); }
};

// Raw dual problem: max sum(alpha) - 1/2 alpha' Q alpha, Q_ij = y_i y_j K_ij,
// 0 <= alpha_i <= upper_i, sum alpha_i y_i = 0.
struct DualProblem {
  RowMatrix x;
  std::vector<std::int8_t> y;  // +1 / -1
  std::vector<double> upper;
  double gamma = 0.1;
};

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;  // dual objective (maximization form)
  std::int64_t iterations = 0;
  std::size_t n_free = 0;
  std::size_t n_at_upper = 0;
};

struct SmoOptions {
  double tol = 1e-3;
  std::size_t cache_mb = 256;
  std::int64_t max_iter = 0;
};

DualSolution smo_solve(const DualProblem& problem, const SmoOptions& options = {});

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

inline std::int8_t label_map(std::uint8_t y) { return y ? std::int8_t{1} : std::int8_t{-1}; }
inline std::uint8_t label_unmap(std::int8_t y) { return static_cast<std::uint8_t>((y + 1) / 2); }

// Sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij, evaluated directly.
double dual_objective(const DualProblem& problem, std::span<const double> alpha);

struct KktReport {
  double max_violation = 0.0;  // worst margin violation over all points
  std::size_t worst_index = 0;
  double equality_residual = 0.0;  // |sum alpha_i y_i|
  bool passed(double tol) const { return max_violation <= tol; }
};

// Margin-form KKT check of (alpha, bias) on every training point.
KktReport kkt_check(const DualProblem& problem, std::span<const double> alpha, double bias);

// Indices (ascending) of a class-stratified subset of size min(n, max_size).
std::vector<std::size_t> stratified_subsample(std::span<const std::uint8_t> labels, std::size_t max_size,
                                              std::uint64_t seed);

struct SvmFitInfo {
  std::vector<std::size_t> train_rows;  // table rows used, ascending
  DualProblem problem;
  DualSolution solution;
};

SvmModel svm_fit(const FeatureTable& table, IndexRange rows, const SvmConfig& config, SvmFitInfo* info = nullptr);

double svm_decision(const SvmModel& model, std::span<const double> x);
std::vector<double> svm_decision(const SvmModel& model, const RowMatrix& x);

// "OCSV" magic, u32 version, u64 n_sv, u32 d, f64 gamma, f64 bias,
// f64 threshold (NaN when unset), u32 mask bits, n_sv*d f64 row-major support
// vectors, n_sv f64 dual coefficients.
void save_svm(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace occ

#endif  // OCC_SVM_HPP
