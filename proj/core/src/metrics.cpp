// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distillkit/error.hpp"

namespace distillkit {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string signed_percent(double fraction_delta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "(%+.2f)", fraction_delta * 100.0);
  return buf;
}

json parse_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error("metrics line " + std::to_string(line_no) + " is not valid JSON: " +
                e.what());
  }
  if (!j.is_object() || !j.contains("v") || !j.contains("kind")) {
    throw Error("metrics line " + std::to_string(line_no) +
                " lacks the 'v'/'kind' schema fields");
  }
  if (j.at("v").get<int>() != kSchemaVersion) {
    throw Error("metrics line " + std::to_string(line_no) +
                " has unsupported schema version " + j.at("v").dump() + ", expected " +
                std::to_string(kSchemaVersion));
  }
  return j;
}

SummaryRow summary_from_json(const json& j) {
  SummaryRow row;
  row.name = j.at("name").get<std::string>();
  row.protocol = j.at("protocol").get<std::string>();
  row.dataset_sig = j.at("dataset").get<std::string>();
  row.model_sig = j.at("model").get<std::string>();
  row.n = j.at("n").get<std::size_t>();
  row.mean_best = j.at("mean_best_test_acc").get<double>();
  row.std_best = j.at("std_best_test_acc").get<double>();
  return row;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open metrics file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

SummaryRow summarize(const ExperimentResult& result) {
  if (result.runs.empty()) throw Error("experiment '" + result.name + "' has no runs");
  SummaryRow row;
  row.name = result.name;
  row.protocol = result.protocol;
  row.dataset_sig = result.dataset_sig;
  row.model_sig = result.model_sig;
  row.n = result.runs.size();
  double sum = 0.0;
  for (const SeedResult& run : result.runs) sum += run.history.best_test_acc;
  row.mean_best = sum / static_cast<double>(row.n);
  if (row.n > 1) {
    double ss = 0.0;
    for (const SeedResult& run : result.runs) {
      const double d = run.history.best_test_acc - row.mean_best;
      ss += d * d;
    }
    row.std_best = std::sqrt(ss / static_cast<double>(row.n - 1));
  }
  return row;
}

std::string run_lines(const std::string& name, const SeedResult& run) {
  std::string out;
  for (const EpochRecord& e : run.history.epochs) {
    json j;
    j["v"] = kSchemaVersion;
    j["kind"] = "epoch";
    j["name"] = name;
    j["seed"] = run.seed;
    j["epoch"] = e.epoch;
    j["lr"] = e.lr;
    j["train_loss"] = e.train_loss;
    j["train_acc"] = e.train_acc;
    j["test_loss"] = e.test_loss;
    j["test_acc"] = e.test_acc;
    out += j.dump();
    out += '\n';
  }
  json j;
  j["v"] = kSchemaVersion;
  j["kind"] = "run_summary";
  j["name"] = name;
  j["seed"] = run.seed;
  j["best_epoch"] = run.history.best_epoch;
  j["best_test_acc"] = run.history.best_test_acc;
  if (run.history.teacher_test_acc >= 0.0) {
    j["teacher_test_acc"] = run.history.teacher_test_acc;
  }
  out += j.dump();
  out += '\n';
  return out;
}

std::string summary_line(const SummaryRow& row, const std::vector<std::uint64_t>& seeds) {
  json j;
  j["v"] = kSchemaVersion;
  j["kind"] = "summary";
  j["name"] = row.name;
  j["protocol"] = row.protocol;
  j["dataset"] = row.dataset_sig;
  j["model"] = row.model_sig;
  j["n"] = row.n;
  j["seeds"] = seeds;
  j["mean_best_test_acc"] = row.mean_best;
  j["std_best_test_acc"] = row.std_best;
  return j.dump() + "\n";
}

std::string metrics_lines(const ExperimentResult& result) {
  std::string out;
  std::vector<std::uint64_t> seeds;
  for (const SeedResult& run : result.runs) {
    out += run_lines(result.name, run);
    seeds.push_back(run.seed);
  }
  out += summary_line(summarize(result), seeds);
  return out;
}

std::string timing_text(const ExperimentResult& result) {
  std::ostringstream out;
  double total = 0.0;
  for (const SeedResult& run : result.runs) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", run.history.wall_seconds);
    out << "seed " << run.seed << ": " << buf << " s\n";
    total += run.history.wall_seconds;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", total);
  out << "total: " << buf << " s\n";
  return out.str();
}

std::vector<ParsedRun> parse_run_summaries(const std::string& ndjson_text) {
  std::vector<ParsedRun> runs;
  std::istringstream in(ndjson_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    if (j.at("kind") != "run_summary") continue;
    ParsedRun run;
    run.seed = j.at("seed").get<std::uint64_t>();
    run.best_test_acc = j.at("best_test_acc").get<double>();
    if (j.contains("teacher_test_acc")) {
      run.teacher_test_acc = j.at("teacher_test_acc").get<double>();
    }
    runs.push_back(run);
  }
  return runs;
}

SummaryRow read_summary(const std::string& path) {
  const std::vector<SummaryRow> rows = read_summaries(path);
  if (rows.empty()) throw Error("no summary record in metrics file '" + path + "'");
  return rows.front();
}

std::vector<SummaryRow> read_summaries(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<SummaryRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    if (j.at("kind") == "summary") rows.push_back(summary_from_json(j));
  }
  return rows;
}

std::string compare_table(const std::vector<SummaryRow>& rows) {
  if (rows.size() < 2) throw Error("comparison needs at least two summaries");
  for (const SummaryRow& row : rows) {
    if (row.dataset_sig != rows.front().dataset_sig) {
      throw Error("cannot compare '" + row.name + "' (" + row.dataset_sig + ") with '" +
                  rows.front().name + "' (" + rows.front().dataset_sig +
                  "): dataset signatures differ");
    }
    if (row.model_sig != rows.front().model_sig) {
      throw Error("cannot compare '" + row.name + "' (" + row.model_sig + ") with '" +
                  rows.front().name + "' (" + rows.front().model_sig +
                  "): model signatures differ");
    }
  }
  std::size_t name_w = 4, proto_w = 8;
  for (const SummaryRow& row : rows) {
    name_w = std::max(name_w, row.name.size());
    proto_w = std::max(proto_w, row.protocol.size());
  }
  std::ostringstream out;
  out << "dataset: " << rows.front().dataset_sig << "\n";
  out << "model:   " << rows.front().model_sig << "\n";
  auto pad = [&out](const std::string& s, std::size_t width) {
    out << s << std::string(s.size() < width ? width - s.size() + 2 : 2, ' ');
  };
  pad("name", name_w);
  pad("protocol", proto_w);
  out << "n  best_acc%        delta_pp\n";
  const double reference = rows.front().mean_best;
  for (const SummaryRow& row : rows) {
    pad(row.name, name_w);
    pad(row.protocol, proto_w);
    std::string acc = percent(row.mean_best) + " +- " + percent(row.std_best);
    out << row.n << "  ";
    pad(acc, 15);
    out << signed_percent(row.mean_best - reference) << "\n";
  }
  return out.str();
}

}  // namespace distillkit
