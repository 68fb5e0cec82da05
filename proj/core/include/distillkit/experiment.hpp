// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment execution: runs a configured protocol over its seed list,
// expands sweep grids and teacher-checkpoint sweeps, and lays results out on
// disk as
//   <out>/<name>/metrics.ndjson       deterministic metrics records
//   <out>/<name>/timing.txt           wall-clock sidecar
//   <out>/<name>/seed<k>/final.ckpt   trained model per seed
//   <out>/<name>/seed<k>/snap<e>.ckpt requested snapshots
//   <out>/<name>/seed<k>/self_teacher.ckpt  (tf-self only)
//   <out>/<name>/dekd_curve.tsv       teacher-quality curve (de-kd only)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distillkit/config.hpp"
#include "distillkit/metrics.hpp"

namespace distillkit {

struct RunOverrides {
  std::optional<std::uint64_t> seed;  // replaces the config's seed list
  std::string out_dir;                // overrides every other output choice
  int parallel = 1;                   // worker processes across seeds
};

// Output directory precedence: override flag, then config output_dir, then
// the DISTILLKIT_OUT environment variable, then "./out".
std::string resolve_out_dir(const ExperimentConfig& cfg, const RunOverrides& overrides);

// Runs one seed end to end and writes its checkpoints under seed_dir
// (created on demand; pass "" to skip checkpointing).
SeedResult execute_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::string& seed_dir);

// Runs the whole experiment and returns the summary rows in execution order
// (one row, or one per grid point / teacher checkpoint). Rerunning with the
// same config and seeds reproduces every metrics file byte for byte.
std::vector<SummaryRow> execute_experiment(const ExperimentConfig& cfg,
                                           const RunOverrides& overrides);

}  // namespace distillkit
