// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance --cli <occdetect> --workdir <dir> [--only 1,2,8]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "occ/evalkit.hpp"
#include "occ/hyperopt.hpp"
#include "occ/linmodel.hpp"
#include "occ/lstm.hpp"
#include "occ/pipeline.hpp"
#include "occ/svm.hpp"
#include "occ/synthgen.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-6); }

// ---------------------------------------------------------------------------

Outcome svm_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> size(8, 50), dims(2, 8);
  double worst_gap = 0.0;
  int kkt_failures = 0;
  const int problems = 24;
  for (int rep = 0; rep < problems; ++rep) {
    const auto p = oracle::random_toy_problem(rng, size(rng), dims(rng));
    occ::SmoOptions opt;
    opt.tol = 1e-6;
    const auto s = occ::smo_solve(p, opt);
    const auto q = oracle::dense_dual_qp(p);
    worst_gap = std::max(worst_gap, std::abs(s.objective - q.objective));
    kkt_failures += !occ::kkt_check(p, s.alpha, s.bias).passed(1e-3);
  }
  const double secs = seconds_since(t0);
  return {worst_gap <= 1e-6 && kkt_failures == 0 && secs < 60.0,
          fmt::format("{} problems, max |objective gap| {:.2e}, KKT failures {}, {:.1f}s", problems, worst_gap,
                      kkt_failures, secs)};
}

// ---------------------------------------------------------------------------

std::vector<double*> parameter_slots(occ::LstmParams& params) {
  std::vector<double*> slots;
  params.for_each([&](const std::string&, double* data, Eigen::Index rows, Eigen::Index cols) {
    for (Eigen::Index i = 0; i < rows * cols; ++i) slots.push_back(data + i);
  });
  return slots;
}

double bce(double p, std::uint8_t y, double pos_weight) {
  return y ? -pos_weight * std::log(p) : -std::log(1.0 - p);
}

double lstm_gradient_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  occ::LstmConfig cfg;
  cfg.hidden_dim = 1 + static_cast<int>(seed % 4);
  cfg.seq_len = 1 + static_cast<int>((seed / 4) % 4);
  cfg.num_layers = 1 + static_cast<int>(seed % 3);
  const int width = 2 + static_cast<int>(seed % 3);
  const auto model = occ::lstm_init(cfg, width, seed);
  occ::RowMatrix window(width, cfg.seq_len);
  for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = g(rng);
  const std::uint8_t label = seed % 2;
  const double pos_weight = 1.0 + 0.25 * static_cast<double>(seed % 5);

  occ::nn::Sequence in;
  for (Eigen::Index k = 0; k < window.cols(); ++k) in.emplace_back(window.col(k));
  occ::LstmTape tape;
  occ::lstm_forward_batch(model, in, false, nullptr, tape);
  auto grad = model.params.zeros_like();
  const std::vector<std::uint8_t> labels{label};
  occ::lstm_backward_batch(model, tape, labels, pos_weight, grad);
  std::vector<double> analytic;
  for (double* v : parameter_slots(grad)) analytic.push_back(*v);

  auto probe = model;
  auto slots = parameter_slots(probe.params);
  occ::Vector theta(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) theta[static_cast<Eigen::Index>(i)] = *slots[i];
  const auto numeric = oracle::central_difference(
      [&](const occ::Vector& t) {
        for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = t[static_cast<Eigen::Index>(i)];
        return bce(oracle::lstm_probability(probe, window), label, pos_weight);
      },
      theta, 1e-5);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, rel_err(analytic[i], numeric[static_cast<Eigen::Index>(i)]));
  return worst;
}

double lr_gradient_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::Index n = 40, k = 1 + static_cast<Eigen::Index>(seed % 6);
  occ::RowMatrix x = occ::RowMatrix::Zero(n, k + 4);
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = 1.5 * g(rng);
    x(i, k + static_cast<Eigen::Index>(rng() % 4)) = 1.0;
    y[static_cast<std::size_t>(i)] = g(rng) > 0.3;
    w[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] ? 2.2 : 1.0;
  }
  const occ::Vector theta = occ::Vector::NullaryExpr(k + 4, [&](Eigen::Index) { return g(rng); });
  const double l2 = 0.01 * static_cast<double>(seed % 7);
  occ::Vector grad;
  occ::lr_objective(x, y, w, theta, static_cast<int>(k), l2, &grad);
  const auto numeric = oracle::central_difference(
      [&](const occ::Vector& t) { return occ::lr_objective(x, y, w, t, static_cast<int>(k), l2, nullptr); }, theta,
      1e-6);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) worst = std::max(worst, rel_err(grad[i], numeric[i]));
  return worst;
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double lstm_worst = 0.0, lr_worst = 0.0;
  const int seeds = 60;
  for (int s = 0; s < seeds; ++s) {
    lstm_worst = std::max(lstm_worst, lstm_gradient_error(1000 + static_cast<std::uint64_t>(s)));
    lr_worst = std::max(lr_worst, lr_gradient_error(2000 + static_cast<std::uint64_t>(s)));
  }
  const double secs = seconds_since(t0);
  return {lstm_worst < 1e-4 && lr_worst < 1e-5 && secs < 120.0,
          fmt::format("{} seeds, LSTM max rel err {:.2e}, LR max rel err {:.2e}, {:.1f}s", seeds, lstm_worst,
                      lr_worst, secs)};
}

// ---------------------------------------------------------------------------

Outcome invariants() {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> g(0.0, 1.0);
  double sum_err = 0.0, shift_err = 0.0, ln_mean = 0.0, ln_var = 0.0;
  const int forwards = 1000;
  for (int rep = 0; rep < forwards; ++rep) {
    occ::LstmConfig cfg;
    cfg.hidden_dim = 2 + rep % 15;
    cfg.seq_len = 1 + rep % 24;
    cfg.num_layers = 1 + rep % 2;
    const int width = 2 + rep % 4;
    const auto m = occ::lstm_init(cfg, width, static_cast<std::uint64_t>(rep));
    occ::RowMatrix window(width, cfg.seq_len);
    for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = 2.0 * g(rng);

    occ::nn::Sequence in;
    for (Eigen::Index k = 0; k < window.cols(); ++k) in.emplace_back(window.col(k));
    occ::LstmTape tape;
    occ::lstm_forward_batch(m, in, false, nullptr, tape);
    const occ::Vector beta = tape.attention.weights.col(0);
    sum_err = std::max(sum_err, std::abs(beta.sum() - 1.0));

    const occ::Matrix scores = occ::Matrix::NullaryExpr(cfg.seq_len, 3, [&](Eigen::Index, Eigen::Index) { return 5.0 * g(rng); });
    const double c = 100.0 * g(rng);
    const occ::Matrix shifted = (scores.array() + c).matrix();
    shift_err = std::max(shift_err,
                         (occ::nn::softmax_columns(scores) - occ::nn::softmax_columns(shifted)).cwiseAbs().maxCoeff());

    const occ::Vector z = tape.layer_norm.normalized.col(0);
    ln_mean = std::max(ln_mean, std::abs(z.mean()));
    ln_var = std::max(ln_var, std::abs((z.array() - z.mean()).square().mean() - 1.0));
  }
  return {sum_err <= 1e-12 && shift_err <= 1e-12 && ln_mean < 1e-8 && ln_var < 1e-6,
          fmt::format("{} forwards, |sum beta - 1| {:.1e}, shift {:.1e}, LN mean {:.1e}, LN var err {:.1e}",
                      forwards, sum_err, shift_err, ln_mean, ln_var)};
}

// ---------------------------------------------------------------------------

occ::ScoredSet random_scored(std::mt19937_64& rng, std::size_t n, double separation, bool ties) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution pos(0.2 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  occ::ScoredSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t y = pos(rng);
    double v = g(rng) + (y ? separation : 0.0);
    if (ties) v = std::round(v * 4.0) / 4.0;
    s.scores.push_back(v);
    s.labels.push_back(y);
  }
  s.labels[0] = 1;
  s.labels[1] = 0;
  return s;
}

Outcome threshold_optimality() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> sep(0.0, 3.0);
  int failures = 0;
  double worst_gap = 0.0, worst_bound = 0.0;
  const int sets = 100;
  for (int rep = 0; rep < sets; ++rep) {
    const auto s = random_scored(rng, 500, sep(rng), rep % 4 == 0);
    const double f1 = oracle::f1_at(s.scores, s.labels, occ::select_threshold(s));
    const double best = oracle::sweep_best_f1(s.scores, s.labels);
    // Grid resolution: the most samples strictly between adjacent candidates, each
    // flipped sample moving F1 by at most 2/P.
    const auto cand = occ::threshold_candidates(s.scores);
    std::size_t m = 0;
    for (std::size_t k = 0; k + 1 < cand.size(); ++k)
      m = std::max<std::size_t>(m, static_cast<std::size_t>(std::count_if(
                                       s.scores.begin(), s.scores.end(),
                                       [&](double v) { return v > cand[k] && v < cand[k + 1]; })));
    const double positives = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), 1));
    const double bound = 2.0 * static_cast<double>(m) / positives;
    failures += f1 > best + 1e-12 || best - f1 > bound;
    worst_gap = std::max(worst_gap, best - f1);
    worst_bound = std::max(worst_bound, bound);
  }
  return {failures == 0, fmt::format("{} sets of n=500, max F1 gap {:.4f} (resolution bound up to {:.4f}), failures {}",
                                     sets, worst_gap, worst_bound, failures)};
}

// ---------------------------------------------------------------------------

Outcome auc() {
  std::mt19937_64 rng(777);
  double worst = 0.0, worst_transform = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_scored(rng, 200, 0.3 * (rep % 5), rep % 2 == 0);
    const double a = occ::auc_roc(s.scores, s.labels);
    worst = std::max(worst, std::abs(a - oracle::pairwise_auc(s.scores, s.labels)));
    std::vector<double> e(s.scores), f(s.scores);
    for (auto& v : e) v = std::exp(v);
    for (auto& v : f) v = 0.5 * v + 3.0;
    worst_transform = std::max({worst_transform, std::abs(occ::auc_roc(e, s.labels) - a),
                                std::abs(occ::auc_roc(f, s.labels) - a)});
  }
  return {worst <= 1e-12 && worst_transform <= 1e-12,
          fmt::format("50 sets of n=200, max |rank - pairwise| {:.1e}, max transform change {:.1e}", worst,
                      worst_transform)};
}

// ---------------------------------------------------------------------------

Outcome gp_and_bo() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 1 + rep % 5, n = 3 + rep % 10;
    occ::Matrix x(n, d);
    occ::Vector y(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = u(rng);
    occ::GpHyper h;
    h.length_scales = occ::Vector::NullaryExpr(d, [&](Eigen::Index) { return 0.1 + u(rng); });
    h.amplitude = 0.2 + u(rng);
    h.prior_mean = u(rng);
    h.noise = 1e-6 * h.amplitude * h.amplitude;
    const occ::Vector q = occ::Vector::NullaryExpr(d, [&](Eigen::Index) { return u(rng); });
    const auto p = occ::gp_posterior(occ::gp_fit(x, y, h), q);
    const auto o = oracle::gp_direct(x, y, h, q);
    worst = std::max({worst, std::abs(p.mean - o.mean), std::abs(p.std - o.std)});
  }
  const double ei_zero_a = occ::expected_improvement(0.2, 0.0, 0.5);
  const double ei_zero_b = occ::expected_improvement(0.5, 0.0, 0.5);
  const double ei_unit = occ::expected_improvement(0.5, 1.0, 0.5);
  const bool ei_ok = ei_zero_a == 0.0 && ei_zero_b == 0.0 && std::abs(ei_unit - 0.39894) <= 1e-4;

  const occ::SearchSpace line{{{"x", 0.0, 1.0, occ::Scale::kLinear, occ::DimKind::kContinuous}}};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    occ::BoOptions opt;
    opt.n_init = 4;
    opt.n_iters = 12;
    opt.seed = seed;
    const auto t = occ::bo_optimize([](const occ::Params& l) { return -(l[0] - 0.3) * (l[0] - 0.3); }, line, opt);
    hits += t.evaluations.size() == 16 && std::abs(t.best_lambda[0] - 0.3) <= 0.05;
  }
  return {worst <= 1e-8 && ei_ok && hits >= 18,
          fmt::format("GP max diff {:.1e}, EI(mu=f*,sigma=1) {:.6f}, BO hits {}/20", worst, ei_unit, hits)};
}

// ---------------------------------------------------------------------------

Outcome physics() {
  double worst = 0.0;
  for (double volume : {35.0, 55.0, 120.0}) {
    for (double ach : {0.3, 0.5, 1.2}) {
      occ::ApartmentParams apt;
      apt.noise_co2 = apt.noise_temp = apt.noise_rh = 0.0;
      apt.volume = volume;
      apt.ventilation_rate = ach;
      occ::Schedule s;
      s.start = 1704067200;
      // Long enough for e^{-t/tau} to drop far below 1e-9 relative.
      const double tau_hours = 1.0 / ach;
      const double days = std::ceil(40.0 * tau_hours / 24.0) + 1.0;
      s.occupied.assign(static_cast<std::size_t>(days * 2880.0), 1);
      const auto series = occ::simulate(s, apt, occ::SeasonProfile::none(), 1);
      const double fixed = apt.outdoor_co2 + apt.generation() / (apt.volume * apt.ventilation_rate / 3600.0);
      worst = std::max(worst, std::abs(series.records.back().co2 - fixed));
    }
  }
  occ::SchedulerParams sp;
  sp.seed = 2024;
  const auto durations = occ::occupied_durations(occ::gen_schedule(sp, 1704067200, 180.0));
  std::map<int, int> hist;  // 10-minute bins
  for (double d : durations) ++hist[static_cast<int>(d / 10.0)];
  const auto mode = std::max_element(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.second < b.second; });
  const double mode_minutes = 10.0 * mode->first + 5.0;
  return {worst <= 1e-9 && mode_minutes < 60.0,
          fmt::format("steady-state max error {:.1e} ppm, duration mode {:.0f} min over {} intervals", worst,
                      mode_minutes, durations.size())};
}

// ---------------------------------------------------------------------------

struct EndToEnd {
  // f1[model][mask] with masks all, no-rh-t, no-co2
  std::map<occ::ModelKind, std::array<double, 3>> f1;
  std::map<occ::ModelKind, double> digital, perturbed, seconds;
};

EndToEnd run_end_to_end() {
  occ::RunConfig cfg;
  cfg.scenario = occ::scenario_months(6.0, 2.0, 2.0);
  const auto set = occ::make_scenarios(cfg.seed, cfg.scenario);
  const auto prep = occ::prepare_reference(occ::generate(set.reference), set.reference.splits);
  const auto digital = occ::prepare_transfer(occ::generate(set.digital), prep.standardizer);
  const auto perturbed = occ::prepare_transfer(occ::generate(set.perturbed), prep.standardizer);
  EndToEnd r;
  const std::array<const char*, 3> masks{"all", "no-rh-t", "no-co2"};
  for (auto kind : {occ::ModelKind::kLr, occ::ModelKind::kSvm, occ::ModelKind::kLstm}) {
    for (std::size_t i = 0; i < masks.size(); ++i) {
      const auto m = occ::train_model(kind, prep.full, prep.standardizer, occ::FeatureMask::preset(masks[i]), cfg);
      r.f1[kind][i] = occ::evaluate(m, prep.full, prep.full.splits.test).f1;
      if (i == 0) {
        r.seconds[kind] = m.train_seconds;
        r.digital[kind] = occ::evaluate(m, digital, digital.splits.test).f1;
        r.perturbed[kind] = occ::evaluate(m, perturbed, perturbed.splits.test).f1;
      }
      fmt::print("  {} {}: test F1 {:.4f}\n", occ::model_name(kind), masks[i], r.f1[kind][i]);
      std::fflush(stdout);
    }
  }
  return r;
}

Outcome same_apartment(const EndToEnd& e) {
  Outcome o;
  for (const auto& [kind, f] : e.f1) {
    o.pass &= f[0] >= 0.80;
    o.detail += fmt::format("{}{} {:.4f}", o.detail.empty() ? "test F1 " : ", ", occ::model_name(kind), f[0]);
  }
  return o;
}

Outcome ablation(const EndToEnd& e) {
  Outcome o;
  for (const auto& [kind, f] : e.f1) {
    const double drop_rht = f[0] - f[1], drop_co2 = f[0] - f[2];
    o.pass &= f[2] < f[1] && f[1] < f[0] && drop_co2 >= 2.0 * drop_rht;
    o.detail += fmt::format("{}{}: all {:.4f} noRHT {:.4f} noCO2 {:.4f}", o.detail.empty() ? "" : "; ",
                            occ::model_name(kind), f[0], f[1], f[2]);
  }
  return o;
}

Outcome cross_scenario(const EndToEnd& e) {
  Outcome o;
  for (const auto& [kind, f] : e.f1) {
    o.pass &= e.digital.at(kind) >= 0.70;
    if (kind != occ::ModelKind::kLstm) o.pass &= e.perturbed.at(kind) < f[0];
    o.detail += fmt::format("{}{}: S0 {:.4f} S1 {:.4f} S2 {:.4f}", o.detail.empty() ? "" : "; ", occ::model_name(kind),
                            f[0], e.digital.at(kind), e.perturbed.at(kind));
  }
  return o;
}

Outcome cost_ordering(const EndToEnd& e) {
  const double lr = e.seconds.at(occ::ModelKind::kLr), svm = e.seconds.at(occ::ModelKind::kSvm),
               lstm = e.seconds.at(occ::ModelKind::kLstm);
  return {lr < svm && svm < lstm, fmt::format("LR {:.2f}s, SVM {:.2f}s ({:.1f}x), LSTM {:.2f}s ({:.1f}x)", lr, svm,
                                              svm / lr, lstm, lstm / lr)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing>";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& cli, const fs::path& workdir) {
  const fs::path root = workdir / "determinism";
  fs::remove_all(root);
  std::vector<std::string> commands{"simulate",
                                    "train --model lr",
                                    "train --model svm",
                                    "train --model lstm --mask no-co2",
                                    "tune --model svm",
                                    "tune --model lstm",
                                    "ablate",
                                    "generalize",
                                    "evaluate --model-dir {out}/train_svm_all/model"};
  std::vector<fs::path> outputs{"scenario0_reference/data.csv", "scenario1_digital/data.csv",
                                "scenario2_perturbed/data.csv", "scenario0_reference/params.json",
                                "train_lr_all/metrics.json",    "train_svm_all/metrics.json",
                                "train_lstm_no-co2/metrics.json", "tune_svm_all/metrics.json",
                                "tune_lstm_all/metrics.json",   "tune_svm_all/trace.jsonl",
                                "ablate/metrics.json",          "generalize/metrics.json",
                                "evaluate_svm/metrics.json"};
  std::array<std::map<fs::path, std::string>, 2> seen;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path out = root / fmt::format("run{}", pass);
    fs::create_directories(out);
    const fs::path config = out / "config.json";
    auto cfg = nlohmann::json::parse(R"({
      "seed": 11,
      "scenario": {"transfer_days": 7, "months": [1.0, 0.5, 0.5]},
      "svm": {"max_train_size": 1500},
      "lstm": {"hidden_dim": 4, "seq_len": 6, "max_epochs": 2, "patience": 2, "train_stride": 40},
      "bo": {"n_init": 2, "n_iters": 1}
    })");
    cfg["out"] = out.string();
    std::ofstream(config) << cfg.dump(2);
    for (const auto& c : commands) {
      std::string args = c;
      if (const auto at = args.find("{out}"); at != std::string::npos) args.replace(at, 5, out.string());
      const std::string line = fmt::format("{} {} --config {} > {} 2>&1", cli, args, config.string(),
                                           (out / "log.txt").string());
      if (run(line) != 0) return {false, fmt::format("command failed: {}", args)};
    }
    for (const auto& p : outputs) seen[pass][p] = slurp(out / p);
  }
  std::vector<std::string> differing;
  for (const auto& p : outputs)
    if (seen[0][p] != seen[1][p] || seen[0][p] == "<missing>") differing.push_back(p.string());
  if (!differing.empty()) return {false, fmt::format("differs or missing: {}", fmt::join(differing, ", "))};
  return {true, fmt::format("{} commands, {} output files byte-identical", commands.size(), outputs.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occdetect acceptance suite"};
  std::string cli, only;
  fs::path workdir = fs::temp_directory_path() / "occ_acceptance";
  app.add_option("--cli", cli, "occdetect binary")->required();
  app.add_option("--workdir", workdir, "scratch directory");
  app.add_option("--only", only, "comma-separated criterion numbers");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);
  fs::create_directories(workdir);

  std::set<int> wanted;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) wanted.insert(std::stoi(tok));
  auto selected = [&](int n) { return wanted.empty() || wanted.contains(n); };

  bool all_pass = true;
  auto report = [&](int n, const char* name, const Outcome& o) {
    all_pass &= o.pass;
    fmt::print("criterion {:2d} {:<28} {}  {}\n", n, name, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  };
  auto time_it = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = fn();
    o.detail += fmt::format(" [{:.1f}s]", seconds_since(t0));
    return o;
  };

  if (selected(1)) report(1, "svm-oracle", time_it(svm_oracle));
  if (selected(2)) report(2, "gradients", time_it(gradients));
  if (selected(3)) report(3, "attention-layernorm", time_it(invariants));
  if (selected(4)) report(4, "threshold-optimality", time_it(threshold_optimality));
  if (selected(5)) report(5, "auc", time_it(auc));
  if (selected(6)) report(6, "gp-ei-bo", time_it(gp_and_bo));
  if (selected(7)) report(7, "synthetic-physics", time_it(physics));
  if (selected(8) || selected(9) || selected(10) || selected(11)) {
    const auto t0 = std::chrono::steady_clock::now();
    const EndToEnd e = run_end_to_end();
    fmt::print("  end-to-end runs took {:.1f}s\n", seconds_since(t0));
    if (selected(8)) report(8, "same-apartment", same_apartment(e));
    if (selected(9)) report(9, "ablation", ablation(e));
    if (selected(10)) report(10, "cross-scenario", cross_scenario(e));
    if (selected(11)) report(11, "cost-ordering", cost_ordering(e));
  }
  if (selected(12)) report(12, "determinism", time_it([&] { return determinism(cli, workdir); }));
  return all_pass ? 0 : 1;
}
