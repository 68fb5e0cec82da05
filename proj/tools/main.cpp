// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// distillkit command line:
//   run                  execute an experiment described by a JSON config
//   inspect-soft-targets tabulate softened teacher distributions
//   compare              side-by-side table from metrics summaries
//   preset               print a shipped experiment config
//   gradcheck            autodiff vs finite-difference gradients
//   verify-identities    algebraic identities behind the losses

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distillkit/config.hpp"
#include "distillkit/error.hpp"
#include "distillkit/experiment.hpp"
#include "distillkit/inspect.hpp"
#include "distillkit/metrics.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/verify.hpp"

namespace {

using namespace distillkit;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

int cmd_run(const std::string& config_path, const RunOverrides& overrides) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const std::vector<SummaryRow> rows = execute_experiment(cfg, overrides);
  const std::string out_dir = resolve_out_dir(cfg, overrides);
  for (const SummaryRow& row : rows) {
    std::cout << row.name << ": best test acc " << percent(row.mean_best) << "% +- "
              << percent(row.std_best) << " over " << row.n << " seed(s)\n";
  }
  std::cout << "results under " << out_dir << "\n";
  return 0;
}

int cmd_inspect(const std::string& config_path, const std::string& checkpoint,
                bool use_virtual, double virtual_a, const SoftTargetRequest& request,
                std::uint64_t seed, bool seed_given, const std::string& out_dir) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const std::uint64_t draw_seed = seed_given ? seed : cfg.seeds.front();
  const auto [train_set, test_set] = make_datasets(cfg, draw_seed);
  (void)train_set;

  std::string table;
  if (use_virtual) {
    table = virtual_soft_target_table(test_set.labels, test_set.num_classes, virtual_a,
                                      request);
  } else {
    const Model teacher = load_checkpoint(checkpoint);
    table = soft_target_table(teacher, test_set, request);
  }

  if (out_dir.empty()) {
    std::cout << table;
  } else {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/soft_targets.tsv";
    write_file(path, table);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths) {
  std::vector<SummaryRow> rows;
  for (const std::string& path : paths) rows.push_back(read_summary(path));
  std::cout << compare_table(rows);
  return 0;
}

int cmd_preset(const std::string& name, bool list) {
  if (list || name.empty()) {
    for (const std::string& n : preset_names()) std::cout << n << "\n";
    return 0;
  }
  std::cout << preset(name).to_json_text();
  return 0;
}

int cmd_checks(const std::vector<CheckResult>& results) {
  std::cout << report(results);
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teacher-free knowledge distillation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, preset_name;
  std::uint64_t seed = 0;
  int parallel = 1;
  double virtual_a = 0.99;
  bool list_presets = false;
  SoftTargetRequest request;
  std::vector<std::string> summary_paths;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  CLI::Option* run_seed = run->add_option("--seed", seed, "replace the seed list with one seed");
  run->add_option("--out", out_dir, "output directory (else config output_dir, else $DISTILLKIT_OUT, else ./out)");
  run->add_option("--parallel", parallel, "worker processes across seeds")
      ->check(CLI::PositiveNumber);

  CLI::App* inspect =
      app.add_subcommand("inspect-soft-targets", "tabulate softened teacher distributions");
  inspect->add_option("--config", config_path, "config supplying the sample data")->required();
  CLI::Option* inspect_ckpt =
      inspect->add_option("--checkpoint", checkpoint, "teacher checkpoint to inspect");
  CLI::Option* inspect_virtual =
      inspect->add_option("--virtual-a", virtual_a,
                          "inspect the virtual teacher with this correct-class probability");
  inspect->add_option("--taus", request.taus, "temperatures to sweep")->delimiter(',');
  inspect->add_option("--samples", request.max_samples, "number of samples to tabulate");
  CLI::Option* inspect_seed =
      inspect->add_option("--seed", seed, "dataset draw seed (default: first config seed)");
  inspect->add_option("--out", out_dir, "write soft_targets.tsv into this directory");
  inspect_ckpt->excludes(inspect_virtual);

  CLI::App* compare =
      app.add_subcommand("compare", "compare experiments from their metrics files");
  compare->add_option("metrics", summary_paths, "metrics.ndjson files (first is the reference)")
      ->required()
      ->expected(2, -1);

  CLI::App* preset_cmd = app.add_subcommand("preset", "print a shipped experiment config");
  preset_cmd->add_option("name", preset_name, "preset name");
  preset_cmd->add_flag("--list", list_presets, "list available presets");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "check autodiff against finite differences");
  gradcheck->add_option("--seed", seed, "seed for the random test cases");

  CLI::App* verify =
      app.add_subcommand("verify-identities", "check the algebra behind the losses");
  verify->add_option("--seed", seed, "seed for the random test cases");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      RunOverrides overrides;
      if (run_seed->count() > 0) overrides.seed = seed;
      overrides.out_dir = out_dir;
      overrides.parallel = parallel;
      return cmd_run(config_path, overrides);
    }
    if (inspect->parsed()) {
      if (inspect_ckpt->count() == 0 && inspect_virtual->count() == 0) {
        throw Error("inspect-soft-targets needs --checkpoint or --virtual-a");
      }
      return cmd_inspect(config_path, checkpoint, inspect_virtual->count() > 0, virtual_a,
                         request, seed, inspect_seed->count() > 0, out_dir);
    }
    if (compare->parsed()) return cmd_compare(summary_paths);
    if (preset_cmd->parsed()) return cmd_preset(preset_name, list_presets);
    if (gradcheck->parsed()) {
      return cmd_checks(verify_gradients(gradcheck->count("--seed") > 0 ? seed : 42));
    }
    if (verify->parsed()) {
      return cmd_checks(verify_identities(verify->count("--seed") > 0 ? seed : 42));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
