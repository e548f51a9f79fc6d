// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used by the unit and acceptance tests.
// They share no code with the library beyond its plain data types.

#ifndef OCC_TESTS_ORACLES_HPP
#define OCC_TESTS_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "occ/hyperopt.hpp"
#include "occ/lstm.hpp"
#include "occ/svm.hpp"

namespace oracle {

double rbf(std::span<const double> a, std::span<const double> b, double gamma);

// Dual value sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij with an explicit kernel matrix.
double dual_value(const occ::DualProblem& p, std::span<const double> alpha);

// Projection onto {0 <= a <= upper, sum a y = 0} by bisection on the multiplier.
std::vector<double> project_dual(std::span<const double> v, std::span<const std::int8_t> y,
                                 std::span<const double> upper);

struct QpResult {
  std::vector<double> alpha;
  double objective = 0.0;
  int iterations = 0;
};

// Accelerated projected gradient ascent on the dual with adaptive restart.
QpResult dense_dual_qp(const occ::DualProblem& p, int max_iters = 400000, double tol = 1e-12);

occ::DualProblem random_toy_problem(std::mt19937_64& rng, int n, int d);

double pairwise_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

double f1_at(std::span<const double> scores, std::span<const std::uint8_t> labels, double tau);

// Best F1 over every distinct cut: midpoints between sorted distinct scores,
// plus one cut below the minimum and one above the maximum.
double sweep_best_f1(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Matern-5/2 GP posterior through an explicit dense LU solve.
occ::Posterior gp_direct(const occ::Matrix& x, const occ::Vector& y, const occ::GpHyper& h, const occ::Vector& q);

// Central differences of f at x, step h per coordinate.
occ::Vector central_difference(const std::function<double(const occ::Vector&)>& f, const occ::Vector& x, double h);

// Scalar-loop forward pass of the attention LSTM (eval mode) for one window
// given as width x seq_len.
double lstm_probability(const occ::LstmModel& m, const occ::RowMatrix& window);

}  // namespace oracle

#endif  // OCC_TESTS_ORACLES_HPP
