// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Newline-delimited metrics records and cross-experiment summary tables.
//
// Every record is a single-line JSON object carrying a schema version field
// "v" (currently 1) and a "kind" discriminator:
//   kind=epoch        per-epoch training curve point for one seed
//   kind=run_summary  best-epoch result for one seed
//   kind=summary      mean/std of best test accuracy across seeds
// Records contain no wall-clock data, so rerunning an experiment with the
// same config and seeds reproduces the metrics file byte for byte. Timing
// goes to a separate sidecar file.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillkit/trainer.hpp"

namespace distillkit {

struct SeedResult {
  std::uint64_t seed = 0;
  RunHistory history;
};

struct ExperimentResult {
  std::string name;
  std::string protocol;
  std::string dataset_sig;
  std::string model_sig;
  std::vector<SeedResult> runs;
};

struct SummaryRow {
  std::string name;
  std::string protocol;
  std::string dataset_sig;
  std::string model_sig;
  std::size_t n = 0;
  double mean_best = 0.0;
  double std_best = 0.0;  // sample standard deviation; 0 when n < 2
};

// Mean and sample standard deviation of best test accuracy across runs.
SummaryRow summarize(const ExperimentResult& result);

// Epoch and run_summary records for a single seed, in training order.
std::string run_lines(const std::string& name, const SeedResult& run);

// The closing summary record.
std::string summary_line(const SummaryRow& row, const std::vector<std::uint64_t>& seeds);

// Full metrics stream: run_lines for every seed followed by summary_line.
std::string metrics_lines(const ExperimentResult& result);

// Human-readable wall-clock sidecar (one line per seed plus a total).
std::string timing_text(const ExperimentResult& result);

struct ParsedRun {
  std::uint64_t seed = 0;
  double best_test_acc = 0.0;
  double teacher_test_acc = -1.0;  // -1 when the run had no checkpoint teacher
};

// Extracts run_summary records from an NDJSON fragment; rejects unknown
// schema versions.
std::vector<ParsedRun> parse_run_summaries(const std::string& ndjson_text);

// First summary record in a metrics file.
SummaryRow read_summary(const std::string& path);

// All summary records in a metrics file, in order.
std::vector<SummaryRow> read_summaries(const std::string& path);

// Fixed-width comparison table. The first row is the reference; later rows
// show their gap to it in accuracy percentage points. All rows must agree on
// dataset and model signatures.
std::string compare_table(const std::vector<SummaryRow>& rows);

}  // namespace distillkit
