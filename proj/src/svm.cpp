// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/svm.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <random>
#include <unordered_map>

#include "occ/binio.hpp"
#include "occ/error.hpp"
#include "occ/kernels.hpp"

namespace occ {
namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows K(x_i, .).
class KernelCache {
 public:
  KernelCache(const RowMatrix& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma), n_(static_cast<std::size_t>(x.rows())) {
    const std::size_t row_bytes = std::max<std::size_t>(1, n_ * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  // The returned span stays valid until the next call that evicts it; callers
  // fetch at most two rows per SMO step and capacity is at least two.
  std::span<const double> row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->data;
    }
    if (lru_.size() >= capacity_) {
      auto victim = std::prev(lru_.end());
      index_.erase(victim->key);
      victim->key = i;
      lru_.splice(lru_.begin(), lru_, victim);
    } else {
      lru_.push_front(Entry{i, std::vector<double>(n_)});
    }
    auto& entry = lru_.front();
    kernels::rbf_row(x_, std::span<const double>(x_.row(static_cast<Eigen::Index>(i)).data(), x_.cols()), gamma_,
                     entry.data);
    index_[i] = lru_.begin();
    return entry.data;
  }

 private:
  struct Entry {
    std::size_t key;
    std::vector<double> data;
  };
  const RowMatrix& x_;
  double gamma_;
  std::size_t n_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "kernel arguments differ in dimension");
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * s);
}

DualSolution smo_solve(const DualProblem& p, const SmoOptions& opt) {
  const std::size_t n = p.y.size();
  if (n == 0 || static_cast<std::size_t>(p.x.rows()) != n || p.upper.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "dual problem arrays disagree in length");
  }
  const bool has_pos = std::any_of(p.y.begin(), p.y.end(), [](auto v) { return v > 0; });
  const bool has_neg = std::any_of(p.y.begin(), p.y.end(), [](auto v) { return v < 0; });
  if (!has_pos || !has_neg) throw Error(ErrorCode::kSingleClassTraining, "SVM training set holds one class");

  const auto& y = p.y;
  const auto& C = p.upper;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  KernelCache cache(p.x, p.gamma, opt.cache_mb << 20);
  auto at_upper = [&](std::size_t t) { return alpha[t] >= C[t]; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  const std::int64_t max_iter =
      opt.max_iter > 0 ? opt.max_iter : std::max<std::int64_t>(10'000'000, 100 * static_cast<std::int64_t>(n));

  std::int64_t iter = 0;
  for (;; ++iter) {
    if (iter >= max_iter) {
      throw Error(ErrorCode::kNoConvergence, fmt::format("SMO did not converge in {} iterations", max_iter));
    }
    // i: maximal violator in I_up; j: maximal second-order gain in I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i_sel < 0) break;
    const auto i = static_cast<std::size_t>(i_sel);
    const auto k_i = cache.row(i);
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (at_lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0.0) {
          double quad = 2.0 - 2.0 * k_i[t];
          if (quad <= 0.0) quad = kTau;
          const double gain = -(diff * diff) / quad;
          if (gain <= best_gain) {
            best_gain = gain;
            j_sel = static_cast<std::ptrdiff_t>(t);
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0.0) {
          double quad = 2.0 - 2.0 * k_i[t];
          if (quad <= 0.0) quad = kTau;
          const double gain = -(diff * diff) / quad;
          if (gain <= best_gain) {
            best_gain = gain;
            j_sel = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    if (gmax + gmax2 < opt.tol || j_sel < 0) break;
    const auto j = static_cast<std::size_t>(j_sel);
    const auto k_j = cache.row(j);
    // Capacity >= 2 and i is most recent, so fetching j leaves k_i valid.
    const double kij = k_j[i];
    const double old_ai = alpha[i], old_aj = alpha[j];
    const double ci = C[i], cj = C[j];

    if (y[i] != y[j]) {
      double quad = 2.0 - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = (alpha[i] - old_ai) * y[i];
    const double daj = (alpha[j] - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (k_i[t] * dai + k_j[t] * daj);
  }

  DualSolution sol;
  sol.iterations = iter;
  // Bias: average over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      ++sol.n_at_upper;
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++sol.n_free;
      sum_free += yg;
    }
  }
  const double rho = sol.n_free > 0 ? sum_free / static_cast<double>(sol.n_free) : 0.5 * (ub + lb);
  sol.bias = -rho;
  double v = 0.0;
  for (std::size_t t = 0; t < n; ++t) v += alpha[t] * (grad[t] - 1.0);
  sol.objective = -0.5 * v;
  sol.alpha = std::move(alpha);
  return sol;
}

double dual_objective(const DualProblem& p, std::span<const double> alpha) {
  const std::size_t n = alpha.size();
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      const double k = rbf_kernel(std::span<const double>(p.x.row(static_cast<Eigen::Index>(i)).data(), p.x.cols()),
                                  std::span<const double>(p.x.row(static_cast<Eigen::Index>(j)).data(), p.x.cols()),
                                  p.gamma);
      quad += alpha[i] * alpha[j] * p.y[i] * p.y[j] * k;
    }
  }
  return linear - 0.5 * quad;
}

KktReport kkt_check(const DualProblem& p, std::span<const double> alpha, double bias) {
  const std::size_t n = alpha.size();
  KktReport rep;
  std::vector<std::size_t> sv;
  for (std::size_t j = 0; j < n; ++j)
    if (alpha[j] > 0.0) sv.push_back(j);
  double eq = 0.0;
  for (std::size_t j : sv) eq += alpha[j] * p.y[j];
  rep.equality_residual = std::abs(eq);
  for (std::size_t i = 0; i < n; ++i) {
    double f = bias;
    for (std::size_t j : sv) {
      f += alpha[j] * p.y[j] *
           rbf_kernel(std::span<const double>(p.x.row(static_cast<Eigen::Index>(i)).data(), p.x.cols()),
                      std::span<const double>(p.x.row(static_cast<Eigen::Index>(j)).data(), p.x.cols()), p.gamma);
    }
    const double margin = p.y[i] * f;
    double viol = 0.0;
    if (alpha[i] <= 0.0) viol = std::max(0.0, 1.0 - margin);
    else if (alpha[i] >= p.upper[i]) viol = std::max(0.0, margin - 1.0);
    else viol = std::abs(margin - 1.0);
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.worst_index = i;
    }
  }
  return rep;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::uint8_t> labels, std::size_t max_size,
                                              std::uint64_t seed) {
  if (max_size < 2) throw Error(ErrorCode::kInvalidArgument, "max_size must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw Error(ErrorCode::kSingleClassTraining, "subsampling needs both classes");
  const std::size_t n = labels.size();
  std::vector<std::size_t> out;
  if (n <= max_size) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(max_size) * static_cast<double>(pos.size()) / static_cast<double>(n)));
  n_pos = std::clamp<std::size_t>(n_pos, 1, max_size - 1);
  const std::size_t n_neg = max_size - n_pos;
  std::mt19937_64 rng(seed);
  auto draw = [&](std::vector<std::size_t>& pool, std::size_t k) {
    // Partial Fisher-Yates.
    for (std::size_t a = 0; a < k; ++a) {
      std::uniform_int_distribution<std::size_t> pick(a, pool.size() - 1);
      std::swap(pool[a], pool[pick(rng)]);
      out.push_back(pool[a]);
    }
  };
  draw(pos, n_pos);
  draw(neg, n_neg);
  std::sort(out.begin(), out.end());
  return out;
}

SvmModel svm_fit(const FeatureTable& table, IndexRange rows, const SvmConfig& cfg, SvmFitInfo* info) {
  if (!(cfg.c > 0.0) || !(cfg.gamma > 0.0) || !(cfg.tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SVM needs c > 0, gamma > 0, tol > 0");
  }
  if (rows.empty() || rows.end > table.rows()) throw Error(ErrorCode::kInvalidArgument, "bad SVM training range");
  const std::span<const std::uint8_t> labels(table.y.data() + rows.begin, rows.size());
  auto subset = stratified_subsample(labels, cfg.max_train_size, cfg.seed);

  DualProblem prob;
  prob.gamma = cfg.gamma;
  prob.x.resize(static_cast<Eigen::Index>(subset.size()), table.width());
  prob.y.resize(subset.size());
  std::vector<std::uint8_t> sub_labels(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const std::size_t r = rows.begin + subset[k];
    prob.x.row(static_cast<Eigen::Index>(k)) = table.x.row(static_cast<Eigen::Index>(r));
    sub_labels[k] = table.y[r];
    prob.y[k] = label_map(table.y[r]);
    subset[k] = r;
  }
  const ClassWeights w = cfg.class_weights ? *cfg.class_weights : ClassWeights::balanced(sub_labels);
  prob.upper.resize(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) prob.upper[k] = cfg.c * (prob.y[k] > 0 ? w.pos : w.neg);

  SmoOptions so;
  so.tol = cfg.tol;
  so.cache_mb = cfg.cache_mb;
  so.max_iter = cfg.max_iter;
  DualSolution sol = smo_solve(prob, so);
  spdlog::debug("svm: n={} iterations={} free={} bounded={} objective={:.6g}", subset.size(), sol.iterations,
                sol.n_free, sol.n_at_upper, sol.objective);

  SvmModel m;
  m.gamma = cfg.gamma;
  m.bias = sol.bias;
  m.mask = table.mask;
  std::vector<Eigen::Index> sv;
  for (std::size_t k = 0; k < sol.alpha.size(); ++k)
    if (sol.alpha[k] > 0.0) sv.push_back(static_cast<Eigen::Index>(k));
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), table.width());
  m.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support_vectors.row(static_cast<Eigen::Index>(k)) = prob.x.row(sv[k]);
    m.dual_coefs[static_cast<Eigen::Index>(k)] = sol.alpha[static_cast<std::size_t>(sv[k])] * prob.y[static_cast<std::size_t>(sv[k])];
  }
  if (info) {
    info->train_rows = std::move(subset);
    info->problem = std::move(prob);
    info->solution = std::move(sol);
  }
  return m;
}

double svm_decision(const SvmModel& m, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != m.support_vectors.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "SVM input width mismatch");
  }
  double f = m.bias;
  for (Eigen::Index j = 0; j < m.support_vectors.rows(); ++j) {
    f += m.dual_coefs[j] * rbf_kernel(std::span<const double>(m.support_vectors.row(j).data(), x.size()), x, m.gamma);
  }
  return f;
}

std::vector<double> svm_decision(const SvmModel& m, const RowMatrix& x) {
  if (x.cols() != m.support_vectors.cols()) throw Error(ErrorCode::kDimensionMismatch, "SVM input width mismatch");
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  kernels::rbf_decision(m.support_vectors, std::span<const double>(m.dual_coefs.data(), m.dual_coefs.size()), m.bias,
                        m.gamma, x, out);
  return out;
}

void save_svm(const std::filesystem::path& path, const SvmModel& m) {
  BinaryWriter w(path);
  w.magic("OCSV");
  w.put<std::uint32_t>(1);
  w.put<std::uint64_t>(m.n_support());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.support_vectors.cols()));
  w.put<double>(m.gamma);
  w.put<double>(m.bias);
  w.put<double>(m.threshold.value_or(std::numeric_limits<double>::quiet_NaN()));
  w.put<std::uint32_t>(m.mask.bits());
  w.put_span(std::span<const double>(m.support_vectors.data(), static_cast<std::size_t>(m.support_vectors.size())));
  w.put_span(std::span<const double>(m.dual_coefs.data(), static_cast<std::size_t>(m.dual_coefs.size())));
  w.close();
}

SvmModel load_svm(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("OCSV");
  if (r.get<std::uint32_t>() != 1) throw Error(ErrorCode::kFormat, "unsupported SVM model version");
  SvmModel m;
  const auto n_sv = r.get<std::uint64_t>();
  const auto d = r.get<std::uint32_t>();
  m.gamma = r.get<double>();
  m.bias = r.get<double>();
  const double tau = r.get<double>();
  if (!std::isnan(tau)) m.threshold = tau;
  m.mask = FeatureMask(r.get<std::uint32_t>());
  if (static_cast<std::uint32_t>(m.mask.width()) != d) throw Error(ErrorCode::kFormat, "SVM mask/width mismatch");
  m.support_vectors.resize(static_cast<Eigen::Index>(n_sv), d);
  r.get_span(std::span<double>(m.support_vectors.data(), static_cast<std::size_t>(m.support_vectors.size())));
  m.dual_coefs.resize(static_cast<Eigen::Index>(n_sv));
  r.get_span(std::span<double>(m.dual_coefs.data(), static_cast<std::size_t>(m.dual_coefs.size())));
  return m;
}

}  // namespace occ
