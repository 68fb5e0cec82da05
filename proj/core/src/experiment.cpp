// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/experiment.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distillkit/error.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {
namespace {

namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string seed_dir(const std::string& exp_dir, std::uint64_t seed) {
  return exp_dir + "/seed" + std::to_string(seed);
}

CheckpointMeta meta_at(const RunHistory& history, int epoch, std::uint64_t seed,
                       const LossSpec& loss) {
  CheckpointMeta meta;
  meta.epoch = epoch;
  meta.seed = seed;
  meta.loss_kind = to_string(loss.kind);
  if (epoch >= 1 && static_cast<std::size_t>(epoch) <= history.epochs.size()) {
    meta.train_accuracy = history.epochs[static_cast<std::size_t>(epoch) - 1].train_acc;
    meta.test_accuracy = history.epochs[static_cast<std::size_t>(epoch) - 1].test_acc;
  }
  return meta;
}

void save_snapshots(const RunOutput& out, const RunConfig& rc, const std::string& dir) {
  for (const auto& [epoch, model] : out.snapshots) {
    CheckpointMeta meta = meta_at(out.history, epoch, rc.seed, rc.loss);
    if (epoch == 0) {
      meta.train_accuracy = evaluate(model, rc.train).accuracy;
      meta.test_accuracy = evaluate(model, rc.test).accuracy;
    }
    save_checkpoint(model, dir + "/snap" + std::to_string(epoch) + ".ckpt", meta);
  }
}

void check_teacher_model(const ExperimentConfig& cfg, const Shape& sample_shape,
                         std::size_t num_classes) {
  if (!cfg.teacher_model) return;
  const ModelDescriptor expected =
      cfg.teacher_model->complete(sample_shape, num_classes);
  const Model teacher = load_checkpoint(cfg.teacher_source().checkpoint_path);
  if (!(teacher.descriptor() == expected)) {
    throw Error("checkpoint '" + cfg.teacher_source().checkpoint_path +
                "' holds a different architecture than 'teacher_model' describes");
  }
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

struct ConcreteResult {
  SummaryRow row;
  std::string metrics_text;
  std::string timing;
  double mean_teacher_acc = -1.0;  // across seeds, for checkpoint teachers
};

ConcreteResult merge_runs(const ExperimentConfig& cfg, const std::string& dataset_sig,
                          const std::string& model_sig, const std::string& metrics_text,
                          const std::string& timing) {
  const std::vector<ParsedRun> parsed = parse_run_summaries(metrics_text);
  if (parsed.size() != cfg.seeds.size()) {
    throw Error("expected " + std::to_string(cfg.seeds.size()) + " run records, found " +
                std::to_string(parsed.size()));
  }
  std::vector<double> bests, teacher_accs;
  for (const ParsedRun& run : parsed) {
    bests.push_back(run.best_test_acc);
    if (run.teacher_test_acc >= 0.0) teacher_accs.push_back(run.teacher_test_acc);
  }
  ConcreteResult result;
  result.row.name = cfg.name;
  result.row.protocol = to_string(cfg.protocol);
  result.row.dataset_sig = dataset_sig;
  result.row.model_sig = model_sig;
  result.row.n = parsed.size();
  result.row.mean_best = mean_of(bests);
  result.row.std_best = sample_std(bests, result.row.mean_best);
  result.metrics_text = metrics_text + summary_line(result.row, cfg.seeds);
  result.timing = timing;
  if (teacher_accs.size() == parsed.size()) result.mean_teacher_acc = mean_of(teacher_accs);
  return result;
}

std::string timing_line(std::uint64_t seed, double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  return "seed " + std::to_string(seed) + ": " + buf + " s\n";
}

std::string total_line(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  return std::string("total: ") + buf + " s\n";
}

double parse_timing_seconds(const std::string& line) {
  const std::size_t colon = line.rfind(": ");
  if (colon == std::string::npos) return 0.0;
  return std::strtod(line.c_str() + colon + 2, nullptr);
}

// Workers partition the seed list round-robin; each writes per-seed part
// files that the parent merges in seed order, so the merged metrics stream
// is byte-identical to a sequential run.
ConcreteResult run_parallel(const ExperimentConfig& cfg, const std::string& exp_dir,
                            int workers, bool save_ckpts, const std::string& dataset_sig,
                            const std::string& model_sig) {
  const auto part_path = [&](std::uint64_t seed) {
    return exp_dir + "/metrics.seed" + std::to_string(seed) + "." + cfg.name + ".part";
  };
  const auto timing_part_path = [&](std::uint64_t seed) {
    return part_path(seed) + ".t";
  };

  std::vector<pid_t> pids;
  for (int w = 0; w < workers; ++w) {
    const pid_t pid = fork();
    if (pid < 0) throw Error("fork failed");
    if (pid == 0) {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < cfg.seeds.size();
             i += static_cast<std::size_t>(workers)) {
          const std::uint64_t seed = cfg.seeds[i];
          const SeedResult run =
              execute_seed(cfg, seed, save_ckpts ? seed_dir(exp_dir, seed) : "");
          write_file(part_path(seed), run_lines(cfg.name, run));
          write_file(timing_part_path(seed), timing_line(seed, run.history.wall_seconds));
        }
        _exit(0);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "seed worker: %s\n", e.what());
        _exit(1);
      }
    }
    pids.push_back(pid);
  }

  bool failed = false;
  for (pid_t pid : pids) {
    int status = 0;
    if (waitpid(pid, &status, 0) < 0 || !WIFEXITED(status) ||
        WEXITSTATUS(status) != 0) {
      failed = true;
    }
  }
  if (failed) throw Error("a seed worker failed; see its diagnostic above");

  std::string metrics_text, timing;
  double total = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    metrics_text += read_file(part_path(seed));
    const std::string t = read_file(timing_part_path(seed));
    timing += t;
    total += parse_timing_seconds(t);
    fs::remove(part_path(seed));
    fs::remove(timing_part_path(seed));
  }
  timing += total_line(total);
  return merge_runs(cfg, dataset_sig, model_sig, metrics_text, timing);
}

ConcreteResult run_concrete(const ExperimentConfig& cfg, const std::string& exp_dir,
                            int parallel, bool save_ckpts) {
  const auto base = make_datasets(cfg, cfg.seeds.front());
  const std::string dataset_sig = cfg.dataset.signature();
  const std::string model_sig =
      cfg.model.signature(base.first.sample_shape(), base.first.num_classes);

  const int workers =
      std::min<int>(std::max(parallel, 1), static_cast<int>(cfg.seeds.size()));
  if (workers > 1) {
    return run_parallel(cfg, exp_dir, workers, save_ckpts, dataset_sig, model_sig);
  }

  std::string metrics_text, timing;
  double total = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedResult run =
        execute_seed(cfg, seed, save_ckpts ? seed_dir(exp_dir, seed) : "");
    metrics_text += run_lines(cfg.name, run);
    timing += timing_line(seed, run.history.wall_seconds);
    total += run.history.wall_seconds;
  }
  timing += total_line(total);
  return merge_runs(cfg, dataset_sig, model_sig, metrics_text, timing);
}

std::string format_value(double v) { return nlohmann::json(v).dump(); }

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& cfg) {
  const char* keys[] = {"alpha", "tau", "a"};
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const char* key : keys) {
    if (auto it = cfg.grid.find(key); it != cfg.grid.end()) axes.emplace_back(key, it->second);
  }
  std::vector<ExperimentConfig> out;
  std::vector<std::size_t> index(axes.size(), 0);
  while (true) {
    ExperimentConfig sub = cfg;
    sub.grid.clear();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double value = axes[a].second[index[a]];
      if (axes[a].first == "alpha") {
        sub.loss.alpha = value;
      } else if (axes[a].first == "tau") {
        sub.loss.tau = value;
      } else {
        sub.loss.a = value;
        sub.loss_a_given = true;
      }
      sub.name += "-" + axes[a].first + format_value(value);
    }
    sub.validate();
    out.push_back(std::move(sub));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++index[a] < axes[a].second.size()) break;
      index[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

std::string dekd_curve_tsv(const std::vector<std::pair<std::string, ConcreteResult>>& points) {
  std::ostringstream out;
  out << "checkpoint\tteacher_test_acc\tstudent_mean_best_test_acc\n";
  for (const auto& [path, result] : points) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", result.mean_teacher_acc,
                  result.row.mean_best);
    out << path << "\t" << buf << "\n";
  }
  return out.str();
}

}  // namespace

std::string resolve_out_dir(const ExperimentConfig& cfg, const RunOverrides& overrides) {
  if (!overrides.out_dir.empty()) return overrides.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("DISTILLKIT_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "./out";
}

SeedResult execute_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::string& dir) {
  auto [train_set, test_set] = make_datasets(cfg, seed);
  const ModelDescriptor desc =
      cfg.model.complete(train_set.sample_shape(), train_set.num_classes);
  check_teacher_model(cfg, train_set.sample_shape(), train_set.num_classes);
  const RunConfig rc = make_run_config(cfg, seed, train_set, test_set);

  RunOutput out;
  Model self_teacher;
  RunHistory self_teacher_history;
  switch (cfg.protocol) {
    case Protocol::Baseline:
    case Protocol::Lsr:
      out = run_baseline(desc, rc);
      break;
    case Protocol::Kd:
      out = run_normal_kd(desc, cfg.teacher_source().checkpoint_path, rc);
      break;
    case Protocol::ReKd:
      out = run_re_kd(desc, cfg.teacher_source().checkpoint_path, rc);
      break;
    case Protocol::DeKd:
      out = run_de_kd(desc, cfg.teacher_source().checkpoint_path, rc);
      break;
    case Protocol::TfSelf: {
      auto [stage1, stage2] = run_tf_self(desc, rc);
      self_teacher = std::move(stage1.model);
      self_teacher_history = stage1.history;
      out = std::move(stage2);
      out.history.teacher_test_acc = self_teacher_history.epochs.back().test_acc;
      out.history.wall_seconds += stage1.history.wall_seconds;
      break;
    }
    case Protocol::TfReg:
      out = run_tf_reg(desc, rc);
      break;
  }

  if (!dir.empty()) {
    fs::create_directories(dir);
    save_checkpoint(out.model, dir + "/final.ckpt",
                    meta_at(out.history, cfg.epochs, seed, rc.loss));
    save_snapshots(out, rc, dir);
    if (self_teacher.defined()) {
      LossSpec ce;
      save_checkpoint(self_teacher, dir + "/self_teacher.ckpt",
                      meta_at(self_teacher_history, cfg.epochs, seed, ce));
    }
  }
  return SeedResult{seed, std::move(out.history)};
}

std::vector<SummaryRow> execute_experiment(const ExperimentConfig& cfg,
                                           const RunOverrides& overrides) {
  ExperimentConfig local = cfg;
  if (overrides.seed) local.seeds = {*overrides.seed};
  local.validate();

  if (!local.grid.empty()) {
    std::vector<SummaryRow> rows;
    for (const ExperimentConfig& sub : expand_grid(local)) {
      for (SummaryRow& row : execute_experiment(sub, overrides)) {
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  const std::string exp_dir = resolve_out_dir(local, overrides) + "/" + local.name;
  fs::create_directories(exp_dir);

  if (local.protocol == Protocol::DeKd && !local.teacher_checkpoints.empty()) {
    // Teacher-quality sweep: the first checkpoint is the headline run (it
    // keeps the per-seed checkpoints); every sweep point contributes a
    // metrics block and a curve row.
    std::vector<std::pair<std::string, ConcreteResult>> points;
    std::string metrics_text, timing;
    std::vector<SummaryRow> rows;
    for (std::size_t i = 0; i < local.teacher_checkpoints.size(); ++i) {
      ExperimentConfig sub = local;
      sub.teacher_checkpoints.clear();
      sub.teacher_checkpoint = local.teacher_checkpoints[i];
      if (i > 0) sub.name += "@" + std::to_string(i);
      ConcreteResult result =
          run_concrete(sub, exp_dir, overrides.parallel, /*save_ckpts=*/i == 0);
      metrics_text += result.metrics_text;
      timing += "# " + sub.name + "\n" + result.timing;
      rows.push_back(result.row);
      points.emplace_back(sub.teacher_checkpoint, std::move(result));
    }
    write_file(exp_dir + "/metrics.ndjson", metrics_text);
    write_file(exp_dir + "/timing.txt", timing);
    write_file(exp_dir + "/dekd_curve.tsv", dekd_curve_tsv(points));
    return rows;
  }

  ConcreteResult result =
      run_concrete(local, exp_dir, overrides.parallel, /*save_ckpts=*/true);
  write_file(exp_dir + "/metrics.ndjson", result.metrics_text);
  write_file(exp_dir + "/timing.txt", result.timing);
  if (local.protocol == Protocol::DeKd) {
    std::vector<std::pair<std::string, ConcreteResult>> points;
    points.emplace_back(local.teacher_checkpoint, result);
    write_file(exp_dir + "/dekd_curve.tsv", dekd_curve_tsv(points));
  }
  return {result.row};
}

}  // namespace distillkit
