// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/hyperopt.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "occ/error.hpp"
#include "occ/parallel.hpp"

namespace occ {
namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kRelativeNoise = 1e-6;
constexpr double kLengthGrid[] = {0.03, 0.06, 0.1, 0.17, 0.3, 0.5, 0.8, 1.3, 2.0, 3.5};

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_coord(const SearchDim& d, double v) {
  if (d.scale == Scale::kLog) return (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
  return (v - d.lower) / (d.upper - d.lower);
}

double natural_coord(const SearchDim& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (d.scale == Scale::kLog) return std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)));
  return d.lower + u * (d.upper - d.lower);
}

void record(BOTrace& trace, Evaluation e) {
  trace.evaluations.push_back(std::move(e));
  const auto& last = trace.evaluations.back();
  if (last.objective > trace.best_objective) {
    trace.best_objective = last.objective;
    trace.best_lambda = last.lambda;
    trace.best_index = trace.evaluations.size() - 1;
  }
}

}  // namespace

void SearchSpace::validate() const {
  if (dims.empty()) throw Error(ErrorCode::kInvalidArgument, "search space has no dimensions");
  for (const auto& d : dims) {
    if (!(d.lower < d.upper)) throw Error(ErrorCode::kInvalidArgument, fmt::format("dim '{}': lower >= upper", d.name));
    if (d.scale == Scale::kLog && !(d.lower > 0.0))
      throw Error(ErrorCode::kInvalidArgument, fmt::format("dim '{}': log scale needs lower > 0", d.name));
  }
}

Vector SearchSpace::to_unit(const Params& lambda) const {
  if (lambda.size() != dims.size()) throw Error(ErrorCode::kDimensionMismatch, "lambda size differs from space");
  Vector u(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) u[static_cast<Eigen::Index>(i)] = unit_coord(dims[i], lambda[i]);
  return u;
}

Params SearchSpace::from_unit(const Vector& u) const {
  Params p(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) p[i] = natural_coord(dims[i], u[static_cast<Eigen::Index>(i)]);
  return snap(p);
}

Params SearchSpace::snap(const Params& lambda) const {
  Params p = lambda;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    p[i] = std::clamp(p[i], dims[i].lower, dims[i].upper);
    if (dims[i].kind == DimKind::kInteger) p[i] = std::clamp(std::round(p[i]), std::ceil(dims[i].lower), std::floor(dims[i].upper));
  }
  return p;
}

bool SearchSpace::contains(const Params& lambda) const {
  if (lambda.size() != dims.size()) return false;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (lambda[i] < dims[i].lower || lambda[i] > dims[i].upper) return false;
    if (dims[i].kind == DimKind::kInteger && lambda[i] != std::round(lambda[i])) return false;
  }
  return true;
}

nlohmann::ordered_json SearchSpace::describe(const Params& lambda) const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < dims.size() && i < lambda.size(); ++i) {
    if (dims[i].kind == DimKind::kInteger) j[dims[i].name] = static_cast<std::int64_t>(lambda[i]);
    else j[dims[i].name] = lambda[i];
  }
  return j;
}

Params SearchSpace::parse(const nlohmann::json& named) const {
  Params p;
  for (const auto& d : dims) {
    if (!named.contains(d.name)) throw Error(ErrorCode::kFormat, fmt::format("missing hyperparameter '{}'", d.name));
    p.push_back(named.at(d.name).get<double>());
  }
  return p;
}

SearchSpace svm_search_space() {
  return {{{"C", 1e-2, 1e3, Scale::kLog, DimKind::kContinuous},
           {"gamma", 1e-4, 1e1, Scale::kLog, DimKind::kContinuous}}};
}

SearchSpace lstm_search_space() {
  return {{{"hidden_dim", 8, 128, Scale::kLog, DimKind::kInteger},
           {"num_layers", 1, 3, Scale::kLinear, DimKind::kInteger},
           {"seq_len", 10, 240, Scale::kLinear, DimKind::kInteger},
           {"dropout", 0.05, 0.5, Scale::kLinear, DimKind::kContinuous},
           {"learning_rate", 1e-4, 1e-2, Scale::kLog, DimKind::kContinuous}}};
}

double matern52(const Vector& a, const Vector& b, const GpHyper& hyper) {
  const double r = ((a - b).array() / hyper.length_scales.array()).matrix().norm();
  return hyper.amplitude * hyper.amplitude * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
}

GpModel gp_fit(const Matrix& x, const Vector& y, const GpHyper& hyper) {
  if (x.rows() < 1 || x.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "GP needs matching x and y");
  if (hyper.length_scales.size() != x.cols()) throw Error(ErrorCode::kDimensionMismatch, "length scales differ from x width");
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = matern52(x.row(i).transpose(), x.row(j).transpose(), hyper);
  const double scale = hyper.amplitude * hyper.amplitude;
  GpModel gp{x, y, hyper, Matrix(), Vector(), 0.0};
  for (double jitter = 0.0; jitter <= 1e-2 * scale; jitter = jitter == 0.0 ? 1e-10 * scale : jitter * 10.0) {
    Matrix kk = k;
    kk.diagonal().array() += hyper.noise + jitter;
    Eigen::LLT<Matrix> llt(kk);
    if (llt.info() != Eigen::Success) continue;
    const Matrix l = llt.matrixL();
    const double dmin = l.diagonal().minCoeff(), dmax = l.diagonal().maxCoeff();
    if (!(dmin > 1e-9 * dmax)) continue;
    gp.chol_lower = l;
    gp.alpha = llt.solve((y.array() - hyper.prior_mean).matrix());
    gp.jitter = jitter;
    return gp;
  }
  throw Error(ErrorCode::kIllConditionedKernel, "GP kernel matrix is not positive definite after jitter escalation");
}

Posterior gp_posterior(const GpModel& gp, const Vector& query) {
  const Eigen::Index n = gp.x.rows();
  Vector ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = matern52(gp.x.row(i).transpose(), query, gp.hyper);
  Posterior p;
  p.mean = gp.hyper.prior_mean + ks.dot(gp.alpha);
  const Vector v = gp.chol_lower.triangularView<Eigen::Lower>().solve(ks);
  const double var = gp.hyper.amplitude * gp.hyper.amplitude - v.squaredNorm();
  p.std = std::sqrt(std::max(var, 0.0));
  return p;
}

double log_marginal_likelihood(const GpModel& gp) {
  const Vector r = gp.y.array() - gp.hyper.prior_mean;
  return -0.5 * r.dot(gp.alpha) - gp.chol_lower.diagonal().array().log().sum() -
         0.5 * static_cast<double>(gp.y.size()) * std::log(2.0 * M_PI);
}

GpHyper fit_gp_hyper(const Matrix& x, const Vector& y) {
  GpHyper h;
  const double n = static_cast<double>(y.size());
  h.prior_mean = y.mean();
  const double sd = std::sqrt((y.array() - h.prior_mean).square().sum() / n);
  h.amplitude = sd > 1e-12 ? sd : 1.0;
  h.noise = kRelativeNoise * h.amplitude * h.amplitude;
  h.length_scales = Vector::Constant(x.cols(), 0.3);
  auto score = [&](const GpHyper& trial) {
    try {
      return log_marginal_likelihood(gp_fit(x, y, trial));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  double best = score(h);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      GpHyper trial = h;
      for (double l : kLengthGrid) {
        trial.length_scales[d] = l;
        const double s = score(trial);
        if (s > best) {
          best = s;
          h.length_scales[d] = l;
        }
      }
    }
  }
  return h;
}

double expected_improvement(double mean, double std, double best) {
  const double gap = mean - best;
  if (!(std > 0.0)) return std::max(gap, 0.0);
  const double z = gap / std;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return std::max(gap * cdf + std * pdf, 0.0);
}

Matrix latin_hypercube(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix out(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) out(i, j) = (perm[static_cast<std::size_t>(i)] + u(rng)) / n;
  }
  return out;
}

nlohmann::ordered_json evaluation_to_json(const SearchSpace& space, const Evaluation& e, std::size_t index) {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["lambda"] = space.describe(e.lambda);
  j["objective"] = e.objective;
  j["info"] = e.info;
  return j;
}

BOTrace load_trace_jsonl(const std::filesystem::path& path, const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read trace '{}'", path.string()));
  BOTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Evaluation e;
    e.lambda = space.parse(j.at("lambda"));
    e.objective = j.at("objective").get<double>();
    if (j.contains("info")) e.info = nlohmann::ordered_json::parse(j.at("info").dump());
    record(trace, std::move(e));
  }
  return trace;
}

BOTrace bo_optimize(const Objective& objective, const SearchSpace& space, const BoOptions& options,
                    const BOTrace* resume) {
  space.validate();
  if (options.n_init < 2 || options.n_iters < 0) throw Error(ErrorCode::kInvalidArgument, "need n_init >= 2, n_iters >= 0");
  const int d = static_cast<int>(space.size());
  const std::size_t total = static_cast<std::size_t>(options.n_init + options.n_iters);
  const Matrix design = latin_hypercube(options.n_init, d, stage_seed(options.seed, 0));

  std::ofstream sink;
  if (options.trace_path) {
    sink.open(*options.trace_path, resume ? std::ios::app : std::ios::trunc);
    if (!sink) throw Error(ErrorCode::kIo, fmt::format("cannot write trace '{}'", options.trace_path->string()));
  }

  BOTrace trace;
  auto evaluate = [&](const Params& lambda) {
    Evaluation e;
    e.lambda = lambda;
    ObjectiveResult r;
    try {
      r = objective(lambda);
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::kObjectiveFailure, fmt::format("objective failed at {}: {}", space.describe(lambda).dump(), ex.what()));
    }
    if (!std::isfinite(r.value))
      throw Error(ErrorCode::kObjectiveFailure, fmt::format("objective not finite at {}", space.describe(lambda).dump()));
    e.objective = r.value;
    e.info = std::move(r.info);
    spdlog::info("bo eval {}/{} {} -> {:.5f}", trace.evaluations.size() + 1, total, space.describe(lambda).dump(), e.objective);
    if (sink.is_open()) {
      sink << evaluation_to_json(space, e, trace.evaluations.size()).dump() << '\n';
      sink.flush();
    }
    record(trace, std::move(e));
  };
  auto reuse = [&](std::size_t k) {
    if (resume == nullptr || k >= resume->evaluations.size()) return false;
    record(trace, resume->evaluations[k]);
    return true;
  };

  for (int i = 0; i < options.n_init; ++i) {
    if (reuse(trace.evaluations.size())) continue;
    evaluate(space.from_unit(design.row(i).transpose()));
  }

  for (int it = 0; it < options.n_iters; ++it) {
    if (reuse(trace.evaluations.size())) continue;
    const auto n = static_cast<Eigen::Index>(trace.evaluations.size());
    Matrix x(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = space.to_unit(trace.evaluations[static_cast<std::size_t>(i)].lambda).transpose();
      y[i] = trace.evaluations[static_cast<std::size_t>(i)].objective;
    }
    trace.hyper = fit_gp_hyper(x, y);
    const GpModel gp = gp_fit(x, y, trace.hyper);

    std::mt19937_64 rng(stage_seed(options.seed, static_cast<std::uint64_t>(it) + 1));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, options.local_radius);
    const Vector incumbent = x.row(static_cast<Eigen::Index>(trace.best_index)).transpose();
    const int n_cand = options.n_candidates + options.n_local;
    Matrix cand(n_cand, d);
    for (int c = 0; c < n_cand; ++c) {
      for (int j = 0; j < d; ++j) {
        cand(c, j) = c < options.n_candidates ? uni(rng) : std::clamp(incumbent[j] + gauss(rng), 0.0, 1.0);
      }
    }
    std::vector<double> ei(static_cast<std::size_t>(n_cand));
    OccPragmaOmp(parallel for schedule(static))
    for (int c = 0; c < n_cand; ++c) {
      const Posterior p = gp_posterior(gp, cand.row(c).transpose());
      ei[static_cast<std::size_t>(c)] = expected_improvement(p.mean, p.std, trace.best_objective);
    }
    const auto best = static_cast<Eigen::Index>(std::max_element(ei.begin(), ei.end()) - ei.begin());
    evaluate(space.from_unit(cand.row(best).transpose()));
  }
  return trace;
}

}  // namespace occ
