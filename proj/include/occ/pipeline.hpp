// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// End-to-end orchestration behind the occdetect subcommands.

#ifndef OCC_PIPELINE_HPP
#define OCC_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "occ/dataset.hpp"
#include "occ/evalkit.hpp"
#include "occ/features.hpp"
#include "occ/hyperopt.hpp"
#include "occ/linmodel.hpp"
#include "occ/lstm.hpp"
#include "occ/svm.hpp"
#include "occ/synthgen.hpp"

namespace occ {

std::string_view software_version();

struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = "occ_out";
  std::filesystem::path data_dir;  // simulate output; empty means `out`
  std::optional<std::filesystem::path> data_csv;
  std::optional<std::filesystem::path> model_dir;
  ModelKind model = ModelKind::kLr;
  FeatureMask mask = FeatureMask::all();
  ScenarioOptions scenario;
  std::int64_t max_gap = kDefaultMaxGap;
  LrOptions lr;
  SvmConfig svm;
  LstmConfig lstm;
  int bo_init = 5;
  int bo_iters = 20;
  bool resume = false;
};

// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
nlohmann::ordered_json run_config_to_json(const RunConfig& config);
// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Independent per-stage seeds derived from the root seed.
std::uint64_t stage_seed(std::uint64_t root, std::string_view stage);

struct PreparedData {
  RawFeatures raw;
  Standardizer standardizer;
  FeatureTable full;  // all features, standardized with train statistics
};

PreparedData prepare_reference(const SensorSeries& series, const SplitSpec& splits, std::int64_t max_gap = kDefaultMaxGap);
// Every row lands in the test range; the standardizer is reused, not refit.
FeatureTable prepare_transfer(const SensorSeries& series, const Standardizer& standardizer,
                              std::int64_t max_gap = kDefaultMaxGap);

struct TrainedModel {
  ModelKind kind = ModelKind::kLr;
  FeatureMask mask = FeatureMask::all();
  Standardizer standardizer;
  double threshold = 0.0;
  std::optional<LRModel> lr;
  std::optional<SvmModel> svm;
  std::optional<LstmModel> lstm;
  nlohmann::ordered_json hyper = nlohmann::ordered_json::object();
  std::vector<EpochTrace> trace;
  int best_epoch = 0;
  double train_seconds = 0.0;
};

// Scores on table rows (masked to model.mask). LSTM scores windows of stride 1
// ending inside `rows`; the returned labels are those of the window ends.
ScoredSet score(const TrainedModel& model, const FeatureTable& table, IndexRange rows);

// Fits on the train range, calibrates tau on the validation range.
TrainedModel train_model(ModelKind kind, const FeatureTable& full, const Standardizer& standardizer,
                         FeatureMask ablation, const RunConfig& config);

// Hyperparameters of a tuning space applied onto the run configuration.
RunConfig apply_hyperparameters(ModelKind kind, const Params& lambda, const SearchSpace& space, RunConfig config);

// Refit on train+val with lambda*, tau frozen from validation. LSTM trains for
// `epochs` epochs without early stopping.
TrainedModel final_retrain(ModelKind kind, const FeatureTable& full, const Standardizer& standardizer,
                           FeatureMask ablation, const RunConfig& config, double threshold, int epochs);

EvalReport evaluate(const TrainedModel& model, const FeatureTable& table, IndexRange rows);

void save_trained(const std::filesystem::path& dir, const TrainedModel& model);
TrainedModel load_trained(const std::filesystem::path& dir);

// One row per (model, mask) in the column order of the comparison tables.
std::string table_header();
std::string table_row(ModelKind kind, FeatureMask ablation, const EvalReport& report);

// Embedding of seed, config hash and version shared by every metrics file.
nlohmann::ordered_json provenance(const RunConfig& config, std::string_view command);

int cmd_simulate(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_tune(const RunConfig& config);
int cmd_ablate(const RunConfig& config);
int cmd_generalize(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);

// Scenario data as produced by cmd_simulate, generated in memory when the
// files are absent.
struct ScenarioData {
  ScenarioSpec spec;
  SensorSeries series;
};
ScenarioData load_or_generate(const RunConfig& config, int scenario);

}  // namespace occ

#endif  // OCC_PIPELINE_HPP
