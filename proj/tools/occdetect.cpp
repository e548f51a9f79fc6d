// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// occdetect: simulate, train, tune, ablate, generalize, evaluate.
//
// Log verbosity comes from OCC_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "occ/error.hpp"
#include "occ/pipeline.hpp"

namespace {

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("OCC_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Occupancy detection from indoor CO2, temperature and humidity"};
  app.set_version_flag("--version", std::string(occ::software_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, model_name, mask_name, data_dir, data_csv, model_dir;
  std::uint64_t seed = 0;
  bool resume = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--data-dir", data_dir, "directory written by `simulate` (defaults to --out)");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", model_name, "lr | svm | lstm")->check(CLI::IsMember({"lr", "svm", "lstm"}));
    sub->add_option("--mask", mask_name, "all | no-rh-t | no-co2")->check(CLI::IsMember({"all", "no-rh-t", "no-co2"}));
  };

  std::map<std::string, int (*)(const occ::RunConfig&)> commands = {
      {"simulate", occ::cmd_simulate}, {"train", occ::cmd_train},         {"tune", occ::cmd_tune},
      {"ablate", occ::cmd_ablate},     {"generalize", occ::cmd_generalize}, {"evaluate", occ::cmd_evaluate}};
  auto* simulate = app.add_subcommand("simulate", "write the three synthetic scenarios as CSV + JSON");
  auto* train = app.add_subcommand("train", "train one model on Scenario 0 and report test metrics");
  auto* tune = app.add_subcommand("tune", "Bayesian optimization of svm or lstm hyperparameters");
  auto* ablate = app.add_subcommand("ablate", "all models under the three feature masks");
  auto* generalize = app.add_subcommand("generalize", "evaluate Scenario 0 models on Scenarios 1 and 2");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a saved model");
  for (auto* sub : {simulate, train, tune, ablate, generalize, evaluate}) add_common(sub);
  for (auto* sub : {train, tune, evaluate}) add_model(sub);
  for (auto* sub : {ablate, generalize}) sub->add_option("--mask", mask_name, "feature mask");
  tune->add_flag("--resume", resume, "continue from an existing trace.jsonl");
  evaluate->add_option("--model-dir", model_dir, "directory written by train or tune")->required();
  evaluate->add_option("--data", data_csv, "CSV to evaluate on (default: Scenario 0 test range)");

  CLI11_PARSE(app, argc, argv);

  try {
    occ::RunConfig config;
    if (!config_path.empty()) config = occ::load_run_config(config_path);
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) config.seed = seed;
    if (!out_dir.empty()) config.out = out_dir;
    if (!data_dir.empty()) config.data_dir = data_dir;
    if (!model_name.empty()) config.model = occ::parse_model(model_name);
    if (!mask_name.empty()) config.mask = occ::FeatureMask::preset(mask_name);
    if (!data_csv.empty()) config.data_csv = data_csv;
    if (!model_dir.empty()) config.model_dir = model_dir;
    if (resume) config.resume = true;
    spdlog::info("occdetect {} {} seed={} config={}", occ::software_version(), sub->get_name(), config.seed,
                 occ::config_hash(config));
    return commands.at(sub->get_name())(config);
  } catch (const occ::Error& e) {
    spdlog::error("{}: {}", occ::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
