// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <array>
#include <chrono>
#include <fstream>
#include <set>

#include "occ/error.hpp"

#ifndef OCC_VERSION
#define OCC_VERSION "0.0.0"
#endif

namespace occ {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<ModelKind, 3> kAllModels = {ModelKind::kLr, ModelKind::kSvm, ModelKind::kLstm};
constexpr std::array<const char*, 3> kAblations = {"all", "no-rh-t", "no-co2"};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, fmt::format("config '{}' must be an object", where));
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::kFormat, fmt::format("unknown config key '{}{}{}'", where, where.empty() ? "" : ".", key));
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::kIo, fmt::format("write failed for '{}'", path.string()));
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::string mask_label(FeatureMask ablation) {
  for (const char* name : kAblations)
    if (FeatureMask::preset(name) == ablation) return name;
  std::string out;
  for (const auto& n : ablation.names()) out += (out.empty() ? "" : "+") + n;
  return out;
}

std::string_view scenario_dir(int scenario) {
  static constexpr std::array<std::string_view, 3> names = {"scenario0_reference", "scenario1_digital",
                                                            "scenario2_perturbed"};
  return names.at(static_cast<std::size_t>(scenario));
}

ojson lr_options_json(const LrOptions& o) {
  return {{"l2", o.l2}, {"max_iters", o.max_iters}, {"grad_tol", o.grad_tol}};
}

ojson svm_json(const SvmConfig& c) {
  return {{"c", c.c}, {"gamma", c.gamma}, {"max_train_size", c.max_train_size}, {"tol", c.tol},
          {"cache_mb", c.cache_mb}, {"max_iter", c.max_iter}};
}

ojson lstm_json(const LstmConfig& c) {
  ojson j = {{"hidden_dim", c.hidden_dim},     {"num_layers", c.num_layers},   {"seq_len", c.seq_len},
             {"dropout", c.dropout},           {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
             {"max_epochs", c.max_epochs},     {"patience", c.patience},       {"train_stride", c.train_stride},
             {"grad_clip", c.grad_clip}};
  j["pos_weight"] = c.pos_weight ? ojson(*c.pos_weight) : ojson(nullptr);
  return j;
}

ojson model_hyper(ModelKind kind, const RunConfig& config) {
  switch (kind) {
    case ModelKind::kLr: return lr_options_json(config.lr);
    case ModelKind::kSvm: return svm_json(config.svm);
    case ModelKind::kLstm: return lstm_json(config.lstm);
  }
  return {};
}

std::span<const std::uint8_t> labels_of(const FeatureTable& t, IndexRange r) {
  return {t.y.data() + r.begin, r.size()};
}

TrainedModel fit_on(ModelKind kind, const FeatureTable& t, IndexRange rows, const RunConfig& config,
                    const WindowSet* val_windows, std::optional<int> fixed_epochs) {
  TrainedModel m;
  m.kind = kind;
  m.mask = t.mask;
  m.hyper = model_hyper(kind, config);
  const auto t0 = std::chrono::steady_clock::now();
  switch (kind) {
    case ModelKind::kLr: {
      m.lr = lr_fit(t, rows, ClassWeights::balanced(labels_of(t, rows)), config.lr);
      break;
    }
    case ModelKind::kSvm: {
      SvmConfig cfg = config.svm;
      cfg.seed = stage_seed(config.seed, "svm");
      m.svm = svm_fit(t, rows, cfg);
      break;
    }
    case ModelKind::kLstm: {
      LstmConfig cfg = config.lstm;
      cfg.seed = stage_seed(config.seed, "lstm");
      const auto stride = static_cast<std::size_t>(cfg.train_stride);
      const WindowSet train = make_windows(t, static_cast<std::size_t>(cfg.seq_len), stride, rows);
      LstmTrainResult r = fixed_epochs ? lstm_train_epochs(t, train, cfg, *fixed_epochs)
                                       : lstm_train(t, train, *val_windows, cfg);
      r.model.mask = t.mask;
      m.lstm = std::move(r.model);
      m.trace = std::move(r.trace);
      m.best_epoch = r.best_epoch;
      break;
    }
  }
  m.train_seconds = seconds_since(t0);
  return m;
}

void set_threshold(TrainedModel& m, double tau) {
  m.threshold = tau;
  if (m.lr) m.lr->threshold = tau;
  if (m.svm) m.svm->threshold = tau;
  if (m.lstm) m.lstm->threshold = tau;
}

ojson report_block(const TrainedModel& m, FeatureMask ablation, const EvalReport& r) {
  ojson j;
  j["model"] = std::string(model_name(m.kind));
  j["features"] = mask_label(ablation);
  j["report"] = to_json(r);
  return j;
}

}  // namespace

std::string_view software_version() { return OCC_VERSION; }

std::uint64_t stage_seed(std::uint64_t root, std::string_view stage) { return splitmix(root ^ fnv1a(stage)); }

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  try {
    check_keys(j, {"seed", "out", "data_dir", "data", "model_dir", "model", "mask", "max_gap", "scenario", "lr", "svm",
                   "lstm", "bo", "resume"},
               "");
    read_key(j, "seed", c.seed);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("data")) c.data_csv = fs::path(j.at("data").get<std::string>());
    if (j.contains("model_dir")) c.model_dir = fs::path(j.at("model_dir").get<std::string>());
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("mask")) c.mask = FeatureMask::preset(j.at("mask").get<std::string>());
    read_key(j, "max_gap", c.max_gap);
    read_key(j, "resume", c.resume);
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      check_keys(s, {"reference_months", "train_fraction", "val_fraction", "transfer_days", "months"}, "scenario");
      read_key(s, "reference_months", c.scenario.reference_months);
      read_key(s, "train_fraction", c.scenario.train_fraction);
      read_key(s, "val_fraction", c.scenario.val_fraction);
      read_key(s, "transfer_days", c.scenario.transfer_days);
      if (s.contains("months")) {
        const auto m = s.at("months").get<std::vector<double>>();
        if (m.size() != 3) throw Error(ErrorCode::kFormat, "scenario.months needs [train, val, test]");
        const double transfer = c.scenario.transfer_days;
        c.scenario = scenario_months(m[0], m[1], m[2]);
        c.scenario.transfer_days = transfer;
      }
    }
    if (j.contains("lr")) {
      const auto& s = j.at("lr");
      check_keys(s, {"l2", "max_iters", "grad_tol"}, "lr");
      read_key(s, "l2", c.lr.l2);
      read_key(s, "max_iters", c.lr.max_iters);
      read_key(s, "grad_tol", c.lr.grad_tol);
    }
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      check_keys(s, {"c", "gamma", "max_train_size", "tol", "cache_mb", "max_iter"}, "svm");
      read_key(s, "c", c.svm.c);
      read_key(s, "gamma", c.svm.gamma);
      read_key(s, "max_train_size", c.svm.max_train_size);
      read_key(s, "tol", c.svm.tol);
      read_key(s, "cache_mb", c.svm.cache_mb);
      read_key(s, "max_iter", c.svm.max_iter);
    }
    if (j.contains("lstm")) {
      const auto& s = j.at("lstm");
      check_keys(s, {"hidden_dim", "num_layers", "seq_len", "dropout", "learning_rate", "batch_size", "max_epochs",
                     "patience", "pos_weight", "train_stride", "grad_clip"},
                 "lstm");
      auto& l = c.lstm;
      read_key(s, "hidden_dim", l.hidden_dim);
      read_key(s, "num_layers", l.num_layers);
      read_key(s, "seq_len", l.seq_len);
      read_key(s, "dropout", l.dropout);
      read_key(s, "learning_rate", l.learning_rate);
      read_key(s, "batch_size", l.batch_size);
      read_key(s, "max_epochs", l.max_epochs);
      read_key(s, "patience", l.patience);
      read_key(s, "train_stride", l.train_stride);
      read_key(s, "grad_clip", l.grad_clip);
      if (s.contains("pos_weight") && !s.at("pos_weight").is_null()) l.pos_weight = s.at("pos_weight").get<double>();
      l.validate();
    }
    if (j.contains("bo")) {
      const auto& s = j.at("bo");
      check_keys(s, {"n_init", "n_iters"}, "bo");
      read_key(s, "n_init", c.bo_init);
      read_key(s, "n_iters", c.bo_iters);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, fmt::format("bad run config: {}", e.what()));
  }
  return c;
}

RunConfig load_run_config(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read config '{}'", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, fmt::format("config '{}' is not JSON: {}", path.string(), e.what()));
  }
  return run_config_from_json(j, std::move(base));
}

nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["model"] = std::string(model_name(c.model));
  j["mask"] = mask_label(c.mask);
  j["max_gap"] = c.max_gap;
  j["scenario"] = {{"reference_months", c.scenario.reference_months},
                   {"train_fraction", c.scenario.train_fraction},
                   {"val_fraction", c.scenario.val_fraction},
                   {"transfer_days", c.scenario.transfer_days}};
  j["lr"] = lr_options_json(c.lr);
  j["svm"] = svm_json(c.svm);
  j["lstm"] = lstm_json(c.lstm);
  j["bo"] = {{"n_init", c.bo_init}, {"n_iters", c.bo_iters}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  return fmt::format("{:016x}", fnv1a(run_config_to_json(config).dump()));
}

nlohmann::ordered_json provenance(const RunConfig& config, std::string_view command) {
  return {{"command", std::string(command)},
          {"seed", config.seed},
          {"config_hash", config_hash(config)},
          {"version", std::string(software_version())}};
}

PreparedData prepare_reference(const SensorSeries& series, const SplitSpec& splits, std::int64_t max_gap) {
  PreparedData p;
  const auto segments = regularize(series, max_gap);
  p.raw = build_raw_features(segments);
  const SplitRanges ranges = split(p.raw.timestamps, splits);
  p.standardizer = fit_standardizer(p.raw.x, ranges.train);
  if (p.standardizer.any_degenerate()) spdlog::warn("degenerate feature column in the training range");
  p.full = make_table(p.raw, p.standardizer, ranges);
  return p;
}

FeatureTable prepare_transfer(const SensorSeries& series, const Standardizer& standardizer, std::int64_t max_gap) {
  const auto segments = regularize(series, max_gap);
  const RawFeatures raw = build_raw_features(segments);
  SplitRanges ranges{{0, 0}, {0, 0}, {0, raw.rows()}};
  return make_table(raw, standardizer, ranges);
}

ScoredSet score(const TrainedModel& model, const FeatureTable& table, IndexRange rows) {
  const FeatureTable t = table.mask == model.mask ? table : apply_mask(table, model.mask);
  ScoredSet s;
  if (model.kind == ModelKind::kLstm) {
    const auto& lm = *model.lstm;
    const WindowSet w = make_windows(t, static_cast<std::size_t>(lm.config.seq_len), 1, rows);
    s.scores = lstm_predict(lm, t, w);
    for (auto e : w.ends) s.labels.push_back(t.y[e]);
    return s;
  }
  const RowMatrix x = t.x.middleRows(static_cast<Eigen::Index>(rows.begin), static_cast<Eigen::Index>(rows.size()));
  s.scores = model.kind == ModelKind::kLr ? lr_predict_proba(*model.lr, x) : svm_decision(*model.svm, x);
  s.labels.assign(t.y.begin() + static_cast<std::ptrdiff_t>(rows.begin),
                  t.y.begin() + static_cast<std::ptrdiff_t>(rows.end));
  return s;
}

TrainedModel train_model(ModelKind kind, const FeatureTable& full, const Standardizer& standardizer,
                         FeatureMask ablation, const RunConfig& config) {
  const FeatureTable t = apply_mask(full, model_mask(kind, ablation));
  std::optional<WindowSet> val_windows;
  if (kind == ModelKind::kLstm) {
    val_windows = make_windows(t, static_cast<std::size_t>(config.lstm.seq_len),
                               static_cast<std::size_t>(config.lstm.train_stride), t.splits.val);
  }
  TrainedModel m = fit_on(kind, t, t.splits.train, config, val_windows ? &*val_windows : nullptr, std::nullopt);
  m.standardizer = standardizer;
  set_threshold(m, select_threshold(score(m, t, t.splits.val)));
  return m;
}

RunConfig apply_hyperparameters(ModelKind kind, const Params& lambda, const SearchSpace& space, RunConfig config) {
  if (lambda.size() != space.size()) throw Error(ErrorCode::kDimensionMismatch, "lambda size differs from space");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const auto& name = space.dims[i].name;
    const double v = lambda[i];
    if (kind == ModelKind::kSvm && name == "C") config.svm.c = v;
    else if (kind == ModelKind::kSvm && name == "gamma") config.svm.gamma = v;
    else if (kind == ModelKind::kLstm && name == "hidden_dim") config.lstm.hidden_dim = static_cast<int>(v);
    else if (kind == ModelKind::kLstm && name == "num_layers") config.lstm.num_layers = static_cast<int>(v);
    else if (kind == ModelKind::kLstm && name == "seq_len") config.lstm.seq_len = static_cast<int>(v);
    else if (kind == ModelKind::kLstm && name == "dropout") config.lstm.dropout = v;
    else if (kind == ModelKind::kLstm && name == "learning_rate") config.lstm.learning_rate = v;
    else throw Error(ErrorCode::kUnsupportedModel, fmt::format("'{}' is not a {} hyperparameter", name, model_name(kind)));
  }
  return config;
}

TrainedModel final_retrain(ModelKind kind, const FeatureTable& full, const Standardizer& standardizer,
                           FeatureMask ablation, const RunConfig& config, double threshold, int epochs) {
  const FeatureTable t = apply_mask(full, model_mask(kind, ablation));
  const IndexRange combined{t.splits.train.begin, t.splits.val.end};
  std::optional<int> budget;
  if (kind == ModelKind::kLstm) budget = std::max(epochs, 1);
  TrainedModel m = fit_on(kind, t, combined, config, nullptr, budget);
  m.standardizer = standardizer;
  set_threshold(m, threshold);
  return m;
}

EvalReport evaluate(const TrainedModel& model, const FeatureTable& table, IndexRange rows) {
  return compute_metrics(score(model, table, rows), model.threshold);
}

void save_trained(const fs::path& dir, const TrainedModel& m) {
  ensure_dir(dir);
  ojson j;
  j["kind"] = std::string(model_name(m.kind));
  j["feature_mask"] = m.mask.names();
  j["mask_bits"] = m.mask.bits();
  j["threshold"] = m.threshold;
  j["best_epoch"] = m.best_epoch;
  j["hyperparameters"] = m.hyper;
  j["standardizer"] = standardizer_to_json(m.standardizer);
  switch (m.kind) {
    case ModelKind::kLr: j["lr"] = lr_to_json(*m.lr, m.standardizer); break;
    case ModelKind::kSvm: save_svm(dir / "svm.bin", *m.svm); break;
    case ModelKind::kLstm:
      save_lstm(dir / "lstm.bin", *m.lstm);
      write_trace_csv(dir / "trace.csv", m.trace);
      break;
  }
  write_json(dir / "manifest.json", j);
}

TrainedModel load_trained(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::kIo, fmt::format("no model manifest in '{}'", dir.string()));
  nlohmann::json j;
  try {
    in >> j;
    TrainedModel m;
    m.kind = parse_model(j.at("kind").get<std::string>());
    m.mask = FeatureMask(j.at("mask_bits").get<std::uint32_t>());
    m.threshold = j.at("threshold").get<double>();
    m.best_epoch = j.at("best_epoch").get<int>();
    m.hyper = ojson::parse(j.at("hyperparameters").dump());
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    switch (m.kind) {
      case ModelKind::kLr: m.lr = lr_from_json(j.at("lr")); break;
      case ModelKind::kSvm: m.svm = load_svm(dir / "svm.bin"); break;
      case ModelKind::kLstm: m.lstm = load_lstm(dir / "lstm.bin"); break;
    }
    set_threshold(m, m.threshold);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, fmt::format("bad model manifest: {}", e.what()));
  }
}

std::string table_header() { return "model,features,precision,recall,f1,accuracy,auc_roc,threshold,samples"; }

std::string table_row(ModelKind kind, FeatureMask ablation, const EvalReport& r) {
  return fmt::format("{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.6g},{}", model_name(kind), mask_label(ablation),
                     r.precision, r.recall, r.f1, r.accuracy, r.auc_roc, r.threshold, r.samples);
}

ScenarioData load_or_generate(const RunConfig& config, int scenario) {
  const ScenarioSet set = make_scenarios(config.seed, config.scenario);
  const ScenarioSpec& spec = scenario == 0 ? set.reference : scenario == 1 ? set.digital : set.perturbed;
  const fs::path base = config.data_dir.empty() ? config.out : config.data_dir;
  const fs::path dir = base / scenario_dir(scenario);
  if (fs::exists(dir / "data.csv") && fs::exists(dir / "params.json")) {
    std::ifstream in(dir / "params.json");
    nlohmann::json j;
    in >> j;
    ScenarioData d{scenario_from_json(j.at("scenario")), load_csv(dir / "data.csv")};
    spdlog::info("loaded {} ({} rows)", (dir / "data.csv").string(), d.series.size());
    return d;
  }
  spdlog::info("generating {} in memory", scenario_dir(scenario));
  return {spec, generate(spec)};
}

int cmd_simulate(const RunConfig& config) {
  const ScenarioSet set = make_scenarios(config.seed, config.scenario);
  int idx = 0;
  for (const ScenarioSpec* spec : {&set.reference, &set.digital, &set.perturbed}) {
    const fs::path dir = config.out / scenario_dir(idx++);
    ensure_dir(dir);
    const SensorSeries series = generate(*spec);
    write_csv(dir / "data.csv", series);
    ojson j = provenance(config, "simulate");
    j["scenario"] = scenario_to_json(*spec);
    j["rows"] = series.size();
    write_json(dir / "params.json", j);
    spdlog::info("wrote {} rows to {}", series.size(), (dir / "data.csv").string());
  }
  return 0;
}

int cmd_train(const RunConfig& config) {
  const ScenarioData sc = load_or_generate(config, 0);
  const PreparedData prep = prepare_reference(sc.series, sc.spec.splits, config.max_gap);
  const TrainedModel m = train_model(config.model, prep.full, prep.standardizer, config.mask, config);
  const EvalReport val = evaluate(m, prep.full, prep.full.splits.val);
  const EvalReport test = evaluate(m, prep.full, prep.full.splits.test);

  double lr_seconds = m.train_seconds;
  if (config.model != ModelKind::kLr)
    lr_seconds = train_model(ModelKind::kLr, prep.full, prep.standardizer, config.mask, config).train_seconds;

  const fs::path dir = config.out / fmt::format("train_{}_{}", model_name(config.model), mask_label(config.mask));
  save_trained(dir / "model", m);
  ojson j = provenance(config, "train");
  j["model"] = std::string(model_name(m.kind));
  j["features"] = mask_label(config.mask);
  j["feature_columns"] = m.mask.column_names();
  j["threshold"] = m.threshold;
  j["hyperparameters"] = m.hyper;
  if (m.kind == ModelKind::kLstm) j["best_epoch"] = m.best_epoch;
  j["validation"] = to_json(val);
  j["test"] = to_json(test);
  write_json(dir / "metrics.json", j);
  write_json(dir / "timing.json", {{"model", std::string(model_name(m.kind))},
                                   {"train_seconds", m.train_seconds},
                                   {"lr_baseline_seconds", lr_seconds},
                                   {"relative_cost", m.train_seconds / lr_seconds}});
  fmt::print("{}\n{}\n", table_header(), table_row(m.kind, config.mask, test));
  fmt::print("train_seconds={:.3f} relative_cost={:.1f}x\n", m.train_seconds, m.train_seconds / lr_seconds);
  return 0;
}

int cmd_tune(const RunConfig& config) {
  if (config.model == ModelKind::kLr)
    throw Error(ErrorCode::kUnsupportedModel, "lr has no tuned hyperparameters; tune svm or lstm");
  const ModelKind kind = config.model;
  const SearchSpace space = kind == ModelKind::kSvm ? svm_search_space() : lstm_search_space();
  const ScenarioData sc = load_or_generate(config, 0);
  const PreparedData prep = prepare_reference(sc.series, sc.spec.splits, config.max_gap);
  const fs::path dir = config.out / fmt::format("tune_{}_{}", model_name(kind), mask_label(config.mask));
  ensure_dir(dir);

  const Objective objective = [&](const Params& lambda) {
    const RunConfig cfg = apply_hyperparameters(kind, lambda, space, config);
    const TrainedModel m = train_model(kind, prep.full, prep.standardizer, config.mask, cfg);
    const EvalReport val = evaluate(m, prep.full, prep.full.splits.val);
    return ObjectiveResult(val.f1, {{"threshold", m.threshold}, {"best_epoch", m.best_epoch}, {"val_auc", val.auc_roc}});
  };
  BoOptions bo;
  bo.n_init = config.bo_init;
  bo.n_iters = config.bo_iters;
  bo.seed = stage_seed(config.seed, "bo");
  bo.trace_path = dir / "trace.jsonl";
  std::optional<BOTrace> resume;
  if (config.resume && fs::exists(*bo.trace_path)) {
    resume = load_trace_jsonl(*bo.trace_path, space);
    spdlog::info("resuming from {} stored evaluations", resume->evaluations.size());
  }
  const BOTrace trace = bo_optimize(objective, space, bo, resume ? &*resume : nullptr);

  const Evaluation& best = trace.best();
  const RunConfig best_cfg = apply_hyperparameters(kind, best.lambda, space, config);
  const double tau = best.info.value("threshold", 0.0);
  const int epochs = best.info.value("best_epoch", 0);
  const TrainedModel m = final_retrain(kind, prep.full, prep.standardizer, config.mask, best_cfg, tau, epochs);
  const EvalReport test = evaluate(m, prep.full, prep.full.splits.test);
  save_trained(dir / "model", m);

  ojson j = provenance(config, "tune");
  j["model"] = std::string(model_name(kind));
  j["features"] = mask_label(config.mask);
  j["evaluations"] = trace.evaluations.size();
  j["best_lambda"] = space.describe(best.lambda);
  j["best_val_f1"] = trace.best_objective;
  j["threshold"] = tau;
  if (kind == ModelKind::kLstm) j["retrain_epochs"] = std::max(epochs, 1);
  j["test"] = to_json(test);
  write_json(dir / "metrics.json", j);
  write_json(dir / "timing.json", {{"model", std::string(model_name(kind))}, {"retrain_seconds", m.train_seconds}});
  fmt::print("best {} val F1 {:.4f}\n{}\n{}\n", space.describe(best.lambda).dump(), trace.best_objective,
             table_header(), table_row(kind, config.mask, test));
  return 0;
}

int cmd_ablate(const RunConfig& config) {
  const ScenarioData sc = load_or_generate(config, 0);
  const PreparedData prep = prepare_reference(sc.series, sc.spec.splits, config.max_gap);
  const fs::path dir = config.out / "ablate";
  ensure_dir(dir);
  std::string table = table_header() + "\n";
  std::string cost = "model,train_seconds,relative_cost\n";
  ojson j = provenance(config, "ablate");
  j["rows"] = ojson::array();
  double lr_seconds = 0.0;
  for (ModelKind kind : kAllModels) {
    for (const char* name : kAblations) {
      const FeatureMask ablation = FeatureMask::preset(name);
      const TrainedModel m = train_model(kind, prep.full, prep.standardizer, ablation, config);
      const EvalReport test = evaluate(m, prep.full, prep.full.splits.test);
      table += table_row(kind, ablation, test) + "\n";
      j["rows"].push_back(report_block(m, ablation, test));
      if (ablation == FeatureMask::all()) {
        if (kind == ModelKind::kLr) lr_seconds = m.train_seconds;
        cost += fmt::format("{},{:.3f},{:.1f}\n", model_name(kind), m.train_seconds, m.train_seconds / lr_seconds);
      }
      spdlog::info("{} {}: F1 {:.4f}", model_name(kind), name, test.f1);
    }
  }
  write_text(dir / "ablation.csv", table);
  write_text(dir / "cost.csv", cost);
  write_json(dir / "metrics.json", j);
  fmt::print("{}", table);
  return 0;
}

int cmd_generalize(const RunConfig& config) {
  const ScenarioData sc0 = load_or_generate(config, 0);
  const PreparedData prep = prepare_reference(sc0.series, sc0.spec.splits, config.max_gap);
  const ScenarioData sc1 = load_or_generate(config, 1), sc2 = load_or_generate(config, 2);
  const FeatureTable digital = prepare_transfer(sc1.series, prep.standardizer, config.max_gap);
  const FeatureTable perturbed = prepare_transfer(sc2.series, prep.standardizer, config.max_gap);
  const fs::path dir = config.out / "generalize";
  ensure_dir(dir);

  std::array<std::string, 3> tables;
  tables.fill(table_header() + "\n");
  ojson j = provenance(config, "generalize");
  j["standardizer"] = standardizer_to_json(prep.standardizer);
  j["reference"] = ojson::array();
  j["digital"] = ojson::array();
  j["perturbed"] = ojson::array();
  for (ModelKind kind : kAllModels) {
    const TrainedModel m = train_model(kind, prep.full, prep.standardizer, config.mask, config);
    const EvalReport r0 = evaluate(m, prep.full, prep.full.splits.test);
    const EvalReport r1 = evaluate(m, digital, digital.splits.test);
    const EvalReport r2 = evaluate(m, perturbed, perturbed.splits.test);
    tables[0] += table_row(kind, config.mask, r0) + "\n";
    tables[1] += table_row(kind, config.mask, r1) + "\n";
    tables[2] += table_row(kind, config.mask, r2) + "\n";
    j["reference"].push_back(report_block(m, config.mask, r0));
    j["digital"].push_back(report_block(m, config.mask, r1));
    j["perturbed"].push_back(report_block(m, config.mask, r2));
    spdlog::info("{}: F1 reference {:.4f} digital {:.4f} perturbed {:.4f}", model_name(kind), r0.f1, r1.f1, r2.f1);
  }
  write_text(dir / "reference.csv", tables[0]);
  write_text(dir / "digital.csv", tables[1]);
  write_text(dir / "perturbed.csv", tables[2]);
  write_json(dir / "metrics.json", j);
  fmt::print("digital model\n{}perturbed apartment\n{}", tables[1], tables[2]);
  return 0;
}

int cmd_evaluate(const RunConfig& config) {
  if (!config.model_dir) throw Error(ErrorCode::kInvalidArgument, "evaluate needs --model-dir");
  const TrainedModel m = load_trained(*config.model_dir);
  EvalReport r;
  std::string source;
  if (config.data_csv) {
    const FeatureTable t = prepare_transfer(load_csv(*config.data_csv), m.standardizer, config.max_gap);
    r = evaluate(m, t, t.splits.test);
    source = config.data_csv->filename().string();
  } else {
    const ScenarioData sc = load_or_generate(config, 0);
    const PreparedData prep = prepare_reference(sc.series, sc.spec.splits, config.max_gap);
    const FeatureTable t = make_table(prep.raw, m.standardizer, prep.full.splits);
    r = evaluate(m, t, t.splits.test);
    source = "scenario0_reference:test";
  }
  const fs::path dir = config.out / fmt::format("evaluate_{}", model_name(m.kind));
  ensure_dir(dir);
  ojson j = provenance(config, "evaluate");
  j["model"] = std::string(model_name(m.kind));
  j["source"] = source;
  j["feature_columns"] = m.mask.column_names();
  j["report"] = to_json(r);
  write_json(dir / "metrics.json", j);
  fmt::print("{}\n{}\n", table_header(), table_row(m.kind, config.mask, r));
  return 0;
}

}  // namespace occ
