// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distillkit/error.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

std::string field_path(const std::string& section, const char* key) {
  return section.empty() ? key : section + "." + key;
}

void check_object(const json& j, const std::string& section) {
  if (!j.is_object()) {
    throw Error("config section '" + (section.empty() ? std::string("<root>") : section) +
                "' must be an object");
  }
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::vector<std::string> names(allowed.begin(), allowed.end());
      std::sort(names.begin(), names.end());
      throw Error("unknown config key '" + field_path(section, item.key().c_str()) +
                  "' (allowed: " + join(names, ", ") + ")");
    }
  }
}

template <typename T>
void read_field(const json& j, const std::string& section, const char* key, T& out,
                const char* type_name) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error("config field '" + field_path(section, key) + "' must be " + type_name);
  }
}

void read_size(const json& j, const std::string& section, const char* key,
               std::size_t& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  std::int64_t value = -1;
  if (it->is_number_integer() || it->is_number_unsigned()) value = it->get<std::int64_t>();
  if (value < 0) {
    throw Error("config field '" + field_path(section, key) +
                "' must be a nonnegative integer");
  }
  out = static_cast<std::size_t>(value);
}

void read_sizes(const json& j, const std::string& section, const char* key,
                std::vector<std::size_t>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array()) {
    throw Error("config field '" + field_path(section, key) +
                "' must be an array of nonnegative integers");
  }
  std::vector<std::size_t> values;
  for (const json& e : *it) {
    std::int64_t value = -1;
    if (e.is_number_integer() || e.is_number_unsigned()) value = e.get<std::int64_t>();
    if (value < 0) {
      throw Error("config field '" + field_path(section, key) +
                  "' must be an array of nonnegative integers");
    }
    values.push_back(static_cast<std::size_t>(value));
  }
  out = std::move(values);
}

void read_seeds(const json& j, const char* key, std::vector<std::uint64_t>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array()) {
    throw Error(std::string("config field '") + key +
                "' must be an array of nonnegative integers");
  }
  std::vector<std::uint64_t> values;
  for (const json& e : *it) {
    if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
      throw Error(std::string("config field '") + key +
                  "' must be an array of nonnegative integers");
    }
    values.push_back(e.get<std::uint64_t>());
  }
  out = std::move(values);
}

void read_comment(const json& j, const std::string& section,
                  std::map<std::string, std::string>& comments) {
  std::string comment;
  read_field(j, section, "comment", comment, "a string");
  if (!comment.empty()) comments[section] = comment;
}

ModelSpec parse_model(const json& j, const std::string& section,
                      std::map<std::string, std::string>& comments) {
  check_object(j, section);
  check_keys(j, section, {"comment", "arch", "hidden_widths", "conv_channels", "fc_widths"});
  read_comment(j, section, comments);
  ModelSpec spec;
  std::string arch = "mlp";
  read_field(j, section, "arch", arch, "a string");
  try {
    spec.arch = arch_from_string(arch);
  } catch (const Error& e) {
    throw Error("config field '" + field_path(section, "arch") + "': " + e.what());
  }
  if (spec.arch == Arch::PlainCNN) {
    spec.hidden_widths.clear();
    spec.conv_channels = {8, 16, 32};
    spec.fc_widths = {64};
  }
  read_sizes(j, section, "hidden_widths", spec.hidden_widths);
  read_sizes(j, section, "conv_channels", spec.conv_channels);
  read_sizes(j, section, "fc_widths", spec.fc_widths);
  return spec;
}

json model_to_json(const ModelSpec& spec, const std::string& section,
                   const std::map<std::string, std::string>& comments) {
  json j;
  j["arch"] = to_string(spec.arch);
  if (spec.arch == Arch::MLP) {
    j["hidden_widths"] = spec.hidden_widths;
  } else {
    j["conv_channels"] = spec.conv_channels;
    j["fc_widths"] = spec.fc_widths;
  }
  if (auto it = comments.find(section); it != comments.end()) j["comment"] = it->second;
  return j;
}

std::string format_double(double v) {
  return json(v).dump();
}

}  // namespace

std::string to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::Baseline: return "baseline";
    case Protocol::Lsr: return "lsr";
    case Protocol::Kd: return "kd";
    case Protocol::ReKd: return "re-kd";
    case Protocol::DeKd: return "de-kd";
    case Protocol::TfSelf: return "tf-self";
    case Protocol::TfReg: return "tf-reg";
  }
  throw Error("unknown protocol");
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "baseline") return Protocol::Baseline;
  if (name == "lsr") return Protocol::Lsr;
  if (name == "kd") return Protocol::Kd;
  if (name == "re-kd") return Protocol::ReKd;
  if (name == "de-kd") return Protocol::DeKd;
  if (name == "tf-self") return Protocol::TfSelf;
  if (name == "tf-reg") return Protocol::TfReg;
  throw Error("unknown protocol '" + name +
              "', expected baseline, lsr, kd, re-kd, de-kd, tf-self or tf-reg");
}

LossSpec::Kind loss_kind_for(Protocol protocol) {
  switch (protocol) {
    case Protocol::Baseline: return LossSpec::Kind::CE;
    case Protocol::Lsr: return LossSpec::Kind::LSR;
    case Protocol::Kd:
    case Protocol::ReKd:
    case Protocol::DeKd: return LossSpec::Kind::KD;
    case Protocol::TfSelf: return LossSpec::Kind::TfSelf;
    case Protocol::TfReg: return LossSpec::Kind::TfReg;
  }
  throw Error("unknown protocol");
}

void DatasetSpec::validate() const {
  norm.validate();
  switch (kind) {
    case Kind::Synth:
      if (classes < 2) throw Error("config field 'dataset.classes' must be at least 2");
      if (dim == 0) throw Error("config field 'dataset.dim' must be positive");
      if (n_per_class < 5) {
        throw Error("config field 'dataset.n_per_class' must be at least 5");
      }
      if (!(spread > 0.0)) throw Error("config field 'dataset.spread' must be positive");
      return;
    case Kind::Idx:
      if (train_images.empty() || train_labels.empty() || test_images.empty() ||
          test_labels.empty()) {
        throw Error(
            "idx dataset requires fields 'dataset.train_images', 'dataset.train_labels', "
            "'dataset.test_images' and 'dataset.test_labels'");
      }
      return;
    case Kind::Csv:
      if (train_csv.empty() || test_csv.empty()) {
        throw Error("csv dataset requires fields 'dataset.train_csv' and 'dataset.test_csv'");
      }
      return;
  }
  throw Error("unknown dataset kind");
}

std::string DatasetSpec::signature() const {
  switch (kind) {
    case Kind::Synth:
      return "synth(K=" + std::to_string(classes) + ",dim=" + std::to_string(dim) +
             ",n_per_class=" + std::to_string(n_per_class) +
             ",spread=" + format_double(spread) + ")";
    case Kind::Idx: return "idx(" + train_images + ")";
    case Kind::Csv: return "csv(" + train_csv + ")";
  }
  throw Error("unknown dataset kind");
}

ModelDescriptor ModelSpec::complete(const Shape& sample_shape,
                                    std::size_t num_classes) const {
  ModelDescriptor desc;
  desc.arch = arch;
  desc.input_shape = sample_shape;
  desc.num_classes = num_classes;
  if (arch == Arch::MLP) {
    desc.hidden_widths = hidden_widths;
  } else {
    desc.conv_channels = conv_channels;
    desc.fc_widths = fc_widths;
  }
  desc.validate();
  return desc;
}

std::string ModelSpec::signature(const Shape& sample_shape, std::size_t num_classes) const {
  const ModelDescriptor desc = complete(sample_shape, num_classes);
  std::ostringstream out;
  out << to_string(arch) << "[";
  if (arch == Arch::MLP) {
    out << desc.input_size();
    for (std::size_t wdt : desc.hidden_widths) out << "->" << wdt;
    out << "->" << desc.num_classes;
  } else {
    out << shape_str(desc.input_shape) << ";conv";
    for (std::size_t i = 0; i < desc.conv_channels.size(); ++i) {
      out << (i == 0 ? " " : ",") << desc.conv_channels[i];
    }
    out << ";fc";
    for (std::size_t i = 0; i < desc.fc_widths.size(); ++i) {
      out << (i == 0 ? " " : ",") << desc.fc_widths[i];
    }
    out << "->" << desc.num_classes;
  }
  out << "]";
  return out.str();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  check_object(j, "");
  check_keys(j, "",
             {"comment", "name", "protocol", "dataset", "model", "teacher_model",
              "teacher_checkpoint", "teacher_checkpoints", "loss", "optim", "epochs",
              "batch_size", "seeds", "snapshot_epochs", "output_dir", "self_finetune",
              "grid"});

  ExperimentConfig cfg;
  read_comment(j, "", cfg.comments);
  if (!j.contains("protocol")) throw Error("config requires field 'protocol'");
  std::string protocol;
  read_field(j, "", "protocol", protocol, "a string");
  cfg.protocol = protocol_from_string(protocol);
  cfg.loss.kind = loss_kind_for(cfg.protocol);
  read_field(j, "", "name", cfg.name, "a string");
  if (cfg.name.empty()) cfg.name = to_string(cfg.protocol);

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_object(d, "dataset");
    check_keys(d, "dataset",
               {"comment", "kind", "classes", "n_per_class", "dim", "spread", "train_images",
                "train_labels", "test_images", "test_labels", "train_csv", "test_csv", "mean",
                "stddev"});
    read_comment(d, "dataset", cfg.comments);
    std::string kind = "synth";
    read_field(d, "dataset", "kind", kind, "a string");
    if (kind == "synth") {
      cfg.dataset.kind = DatasetSpec::Kind::Synth;
    } else if (kind == "idx") {
      cfg.dataset.kind = DatasetSpec::Kind::Idx;
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetSpec::Kind::Csv;
    } else {
      throw Error("config field 'dataset.kind' must be synth, idx or csv, got '" + kind +
                  "'");
    }
    read_size(d, "dataset", "classes", cfg.dataset.classes);
    read_size(d, "dataset", "n_per_class", cfg.dataset.n_per_class);
    read_size(d, "dataset", "dim", cfg.dataset.dim);
    read_field(d, "dataset", "spread", cfg.dataset.spread, "a number");
    read_field(d, "dataset", "train_images", cfg.dataset.train_images, "a string");
    read_field(d, "dataset", "train_labels", cfg.dataset.train_labels, "a string");
    read_field(d, "dataset", "test_images", cfg.dataset.test_images, "a string");
    read_field(d, "dataset", "test_labels", cfg.dataset.test_labels, "a string");
    read_field(d, "dataset", "train_csv", cfg.dataset.train_csv, "a string");
    read_field(d, "dataset", "test_csv", cfg.dataset.test_csv, "a string");
    read_field(d, "dataset", "mean", cfg.dataset.norm.mean, "a number");
    read_field(d, "dataset", "stddev", cfg.dataset.norm.stddev, "a number");
  }

  if (j.contains("model")) cfg.model = parse_model(j.at("model"), "model", cfg.comments);
  if (j.contains("teacher_model")) {
    cfg.teacher_model = parse_model(j.at("teacher_model"), "teacher_model", cfg.comments);
  }
  read_field(j, "", "teacher_checkpoint", cfg.teacher_checkpoint, "a string");
  read_field(j, "", "teacher_checkpoints", cfg.teacher_checkpoints, "an array of strings");

  if (j.contains("loss")) {
    const json& l = j.at("loss");
    check_object(l, "loss");
    check_keys(l, "loss", {"comment", "alpha", "tau", "a", "tau_squared_scaling"});
    read_comment(l, "loss", cfg.comments);
    read_field(l, "loss", "alpha", cfg.loss.alpha, "a number");
    read_field(l, "loss", "tau", cfg.loss.tau, "a number");
    if (l.contains("a")) {
      read_field(l, "loss", "a", cfg.loss.a, "a number");
      cfg.loss_a_given = true;
    }
    read_field(l, "loss", "tau_squared_scaling", cfg.loss.tau_squared_scaling, "a boolean");
  }

  if (j.contains("optim")) {
    const json& o = j.at("optim");
    check_object(o, "optim");
    check_keys(o, "optim",
               {"comment", "lr0", "momentum", "weight_decay", "milestones", "decay_factor"});
    read_comment(o, "optim", cfg.comments);
    read_field(o, "optim", "lr0", cfg.optim.lr0, "a number");
    read_field(o, "optim", "momentum", cfg.optim.momentum, "a number");
    read_field(o, "optim", "weight_decay", cfg.optim.weight_decay, "a number");
    read_field(o, "optim", "milestones", cfg.optim.milestones, "an array of integers");
    read_field(o, "optim", "decay_factor", cfg.optim.decay_factor, "a number");
  }

  read_field(j, "", "epochs", cfg.epochs, "an integer");
  read_size(j, "", "batch_size", cfg.batch_size);
  read_seeds(j, "seeds", cfg.seeds);
  read_field(j, "", "snapshot_epochs", cfg.snapshot_epochs, "an array of integers");
  read_field(j, "", "output_dir", cfg.output_dir, "a string");
  read_field(j, "", "self_finetune", cfg.self_finetune, "a boolean");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_object(g, "grid");
    check_keys(g, "grid", {"alpha", "tau", "a"});
    for (const auto& item : g.items()) {
      std::vector<double> values;
      try {
        values = item.value().get<std::vector<double>>();
      } catch (const json::exception&) {
        throw Error("config field 'grid." + item.key() + "' must be an array of numbers");
      }
      if (values.empty()) {
        throw Error("config field 'grid." + item.key() + "' must be nonempty");
      }
      cfg.grid[item.key()] = values;
    }
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  if (auto it = comments.find(""); it != comments.end()) j["comment"] = it->second;
  j["name"] = name;
  j["protocol"] = to_string(protocol);

  json d;
  switch (dataset.kind) {
    case DatasetSpec::Kind::Synth:
      d["kind"] = "synth";
      d["classes"] = dataset.classes;
      d["n_per_class"] = dataset.n_per_class;
      d["dim"] = dataset.dim;
      d["spread"] = dataset.spread;
      break;
    case DatasetSpec::Kind::Idx:
      d["kind"] = "idx";
      d["train_images"] = dataset.train_images;
      d["train_labels"] = dataset.train_labels;
      d["test_images"] = dataset.test_images;
      d["test_labels"] = dataset.test_labels;
      d["mean"] = dataset.norm.mean;
      d["stddev"] = dataset.norm.stddev;
      break;
    case DatasetSpec::Kind::Csv:
      d["kind"] = "csv";
      d["train_csv"] = dataset.train_csv;
      d["test_csv"] = dataset.test_csv;
      d["mean"] = dataset.norm.mean;
      d["stddev"] = dataset.norm.stddev;
      break;
  }
  if (auto it = comments.find("dataset"); it != comments.end()) d["comment"] = it->second;
  j["dataset"] = d;

  j["model"] = model_to_json(model, "model", comments);
  if (teacher_model) {
    j["teacher_model"] = model_to_json(*teacher_model, "teacher_model", comments);
  }
  if (!teacher_checkpoint.empty()) j["teacher_checkpoint"] = teacher_checkpoint;
  if (!teacher_checkpoints.empty()) j["teacher_checkpoints"] = teacher_checkpoints;

  json l;
  l["alpha"] = loss.alpha;
  l["tau"] = loss.tau;
  if (protocol == Protocol::TfReg) l["a"] = loss.a;
  if (loss.tau_squared_scaling) l["tau_squared_scaling"] = true;
  if (auto it = comments.find("loss"); it != comments.end()) l["comment"] = it->second;
  j["loss"] = l;

  json o;
  o["lr0"] = optim.lr0;
  o["momentum"] = optim.momentum;
  o["weight_decay"] = optim.weight_decay;
  o["milestones"] = optim.milestones;
  o["decay_factor"] = optim.decay_factor;
  if (auto it = comments.find("optim"); it != comments.end()) o["comment"] = it->second;
  j["optim"] = o;

  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["seeds"] = seeds;
  if (!snapshot_epochs.empty()) j["snapshot_epochs"] = snapshot_epochs;
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  if (self_finetune) j["self_finetune"] = true;
  if (!grid.empty()) {
    json g;
    for (const auto& [key, values] : grid) g[key] = values;
    j["grid"] = g;
  }
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw Error("config field 'name' must be nonempty");
  dataset.validate();
  if (seeds.empty()) throw Error("config field 'seeds' must be nonempty");
  if (epochs < 1) throw Error("config field 'epochs' must be at least 1");
  if (batch_size == 0) throw Error("config field 'batch_size' must be positive");
  optim.validate();
  {
    LossSpec check = loss;
    check.validate(dataset.kind == DatasetSpec::Kind::Synth ? dataset.classes : 2);
  }
  for (int s : snapshot_epochs) {
    if (s < 0 || s > epochs) {
      throw Error("config field 'snapshot_epochs' entry " + std::to_string(s) +
                  " outside [0, " + std::to_string(epochs) + "]");
    }
  }

  const bool needs_checkpoint = protocol == Protocol::Kd || protocol == Protocol::ReKd ||
                                protocol == Protocol::DeKd;
  if (needs_checkpoint && teacher_checkpoint.empty() && teacher_checkpoints.empty()) {
    throw Error("protocol '" + to_string(protocol) +
                "' requires field 'teacher_checkpoint'");
  }
  if (!needs_checkpoint && (!teacher_checkpoint.empty() || !teacher_checkpoints.empty())) {
    throw Error("field 'teacher_checkpoint' is only valid for protocols kd, re-kd and de-kd");
  }
  if (!teacher_checkpoint.empty() && !teacher_checkpoints.empty()) {
    throw Error("specify either 'teacher_checkpoint' or 'teacher_checkpoints', not both");
  }
  if (!teacher_checkpoints.empty() && protocol != Protocol::DeKd) {
    throw Error("field 'teacher_checkpoints' is only valid for protocol 'de-kd'");
  }
  if (teacher_model && !needs_checkpoint) {
    throw Error("field 'teacher_model' is only valid for protocols kd, re-kd and de-kd");
  }
  if (protocol == Protocol::TfReg && !loss_a_given) {
    throw Error("protocol 'tf-reg' requires field 'loss.a'");
  }
  if (self_finetune && protocol != Protocol::TfSelf) {
    throw Error("field 'self_finetune' is only valid for protocol 'tf-self'");
  }
  if (model.arch == Arch::PlainCNN && dataset.kind != DatasetSpec::Kind::Idx) {
    throw Error("plain-cnn models require an idx dataset (image-shaped inputs)");
  }

  if (!grid.empty()) {
    if (protocol == Protocol::Baseline) {
      throw Error("field 'grid' is not applicable to protocol 'baseline'");
    }
    for (const auto& [key, values] : grid) {
      (void)values;
      const bool alpha_ok = key == "alpha";
      const bool tau_ok = key == "tau" && protocol != Protocol::Lsr;
      const bool a_ok = key == "a" && protocol == Protocol::TfReg;
      if (!alpha_ok && !tau_ok && !a_ok) {
        throw Error("grid key '" + key + "' is not applicable to protocol '" +
                    to_string(protocol) + "'");
      }
    }
  }
}

TeacherSource ExperimentConfig::teacher_source() const {
  TeacherSource source;
  switch (protocol) {
    case Protocol::Baseline:
    case Protocol::Lsr:
      source.kind = TeacherSource::Kind::None;
      break;
    case Protocol::Kd:
    case Protocol::ReKd:
    case Protocol::DeKd:
      source.kind = TeacherSource::Kind::Checkpoint;
      source.checkpoint_path =
          teacher_checkpoint.empty() ? teacher_checkpoints.front() : teacher_checkpoint;
      break;
    case Protocol::TfSelf:
      source.kind = TeacherSource::Kind::Self;
      break;
    case Protocol::TfReg:
      source.kind = TeacherSource::Kind::Virtual;
      source.a = loss.a;
      break;
  }
  return source;
}

std::pair<Dataset, Dataset> make_datasets(const ExperimentConfig& cfg,
                                          std::uint64_t run_seed) {
  std::pair<Dataset, Dataset> out;
  switch (cfg.dataset.kind) {
    case DatasetSpec::Kind::Synth:
      out = synth_blobs(cfg.dataset.classes, cfg.dataset.n_per_class, cfg.dataset.dim,
                        cfg.dataset.spread, split_seed(run_seed, kDataStream));
      break;
    case DatasetSpec::Kind::Idx:
      out.first = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels,
                           cfg.dataset.norm);
      out.second = load_idx(cfg.dataset.test_images, cfg.dataset.test_labels,
                            cfg.dataset.norm);
      break;
    case DatasetSpec::Kind::Csv:
      out.first = load_csv(cfg.dataset.train_csv, cfg.dataset.norm);
      out.second = load_csv(cfg.dataset.test_csv, cfg.dataset.norm);
      break;
  }
  out.first.split = "train";
  out.second.split = "test";
  if (cfg.dataset.kind != DatasetSpec::Kind::Synth) {
    // Class count must cover both splits even when one split lacks the top
    // classes.
    const std::size_t k = std::max(out.first.num_classes, out.second.num_classes);
    out.first.num_classes = k;
    out.second.num_classes = k;
  }
  if (out.first.sample_shape() != out.second.sample_shape()) {
    throw Error("train samples " + shape_str(out.first.sample_shape()) +
                " and test samples " + shape_str(out.second.sample_shape()) + " disagree");
  }
  return out;
}

RunConfig make_run_config(const ExperimentConfig& cfg, std::uint64_t seed, Dataset train,
                          Dataset test) {
  RunConfig rc;
  rc.train = std::move(train);
  rc.test = std::move(test);
  rc.loss = cfg.loss;
  rc.loss.kind = loss_kind_for(cfg.protocol);  // kind always follows the protocol
  rc.optim = cfg.optim;
  rc.epochs = cfg.epochs;
  rc.batch_size = cfg.batch_size;
  rc.seed = seed;
  rc.snapshot_epochs = cfg.snapshot_epochs;
  rc.self_finetune = cfg.self_finetune;
  return rc;
}

namespace {

ModelSpec mlp_spec(std::vector<std::size_t> hidden) {
  ModelSpec spec;
  spec.hidden_widths = std::move(hidden);
  return spec;
}

ExperimentConfig desk_base(Protocol protocol) {
  ExperimentConfig cfg;
  cfg.protocol = protocol;
  cfg.name = to_string(protocol);
  cfg.loss.kind = loss_kind_for(protocol);
  return cfg;
}

const char* kDeskComment =
    "desk-scale substitution: synthetic 10-class blobs and a small MLP stand in for the "
    "full-scale dataset/model named by this preset; loss hyperparameters are the "
    "full-scale values";

ExperimentConfig make_preset(const std::string& name) {
  if (name == "baseline-desk") {
    ExperimentConfig cfg = desk_base(Protocol::Baseline);
    cfg.name = name;
    cfg.comments[""] =
        "plain cross-entropy reference run at desk scale; other presets are compared "
        "against this";
    return cfg;
  }
  if (name == "lsr-desk") {
    ExperimentConfig cfg = desk_base(Protocol::Lsr);
    cfg.name = name;
    cfg.loss.alpha = 0.1;
    cfg.comments[""] =
        "label-smoothing baseline at desk scale with the conventional smoothing strength "
        "alpha=0.1";
    return cfg;
  }
  if (name == "kd-cifar100-resnet18-mobilenetv2") {
    ExperimentConfig cfg = desk_base(Protocol::Kd);
    cfg.name = name;
    cfg.loss.alpha = 0.95;
    cfg.loss.tau = 20;
    cfg.teacher_checkpoint = "teacher.ckpt";
    cfg.teacher_model = mlp_spec({1024, 512});
    cfg.comments[""] = kDeskComment;
    cfg.comments["teacher_model"] =
        "teacher analogue of the ResNet18 capacity gap; produce teacher.ckpt by running "
        "baseline-desk with this architecture as 'model'";
    return cfg;
  }
  if (name == "rekd-cifar100-resnet18-mobilenetv2") {
    ExperimentConfig cfg = desk_base(Protocol::ReKd);
    cfg.name = name;
    cfg.loss.alpha = 0.60;
    cfg.loss.tau = 20;
    cfg.model = mlp_spec({1024, 512});
    cfg.teacher_checkpoint = "student.ckpt";
    cfg.teacher_model = mlp_spec({256});
    cfg.comments[""] = kDeskComment;
    cfg.comments["model"] =
        "reversed roles: the larger network is trained, the smaller checkpoint teaches";
    return cfg;
  }
  if (name == "dekd-cifar100-resnet18-teacher") {
    ExperimentConfig cfg = desk_base(Protocol::DeKd);
    cfg.name = name;
    cfg.loss.alpha = 0.95;
    cfg.loss.tau = 20;
    cfg.teacher_checkpoint = "poor_teacher.ckpt";
    cfg.teacher_model = mlp_spec({1024, 512});
    cfg.comments[""] = kDeskComment;
    cfg.comments["teacher_model"] =
        "poorly-trained teacher: produce poor_teacher.ckpt by running baseline-desk with "
        "snapshot_epochs=[1] and pointing at the 1-epoch snapshot";
    return cfg;
  }
  if (name == "tfself-cifar100-mobilenetv2") {
    ExperimentConfig cfg = desk_base(Protocol::TfSelf);
    cfg.name = name;
    cfg.loss.alpha = 0.95;
    cfg.loss.tau = 20;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  if (name == "tfself-cifar100-resnet18") {
    ExperimentConfig cfg = desk_base(Protocol::TfSelf);
    cfg.name = name;
    cfg.loss.alpha = 0.95;
    cfg.loss.tau = 6;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  if (name == "tfself-imagenet") {
    ExperimentConfig cfg = desk_base(Protocol::TfSelf);
    cfg.name = name;
    cfg.loss.alpha = 0.10;
    cfg.loss.tau = 20;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  if (name == "tfreg-cifar100-mobilenetv2") {
    ExperimentConfig cfg = desk_base(Protocol::TfReg);
    cfg.name = name;
    cfg.loss.alpha = 0.95;
    cfg.loss.tau = 40;
    cfg.loss.a = 0.99;
    cfg.loss_a_given = true;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  if (name == "tfreg-cifar100-resnet18") {
    ExperimentConfig cfg = desk_base(Protocol::TfReg);
    cfg.name = name;
    cfg.loss.alpha = 0.10;
    cfg.loss.tau = 20;
    cfg.loss.a = 0.99;
    cfg.loss_a_given = true;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  if (name == "tfreg-imagenet") {
    ExperimentConfig cfg = desk_base(Protocol::TfReg);
    cfg.name = name;
    cfg.loss.alpha = 0.10;
    cfg.loss.tau = 20;
    cfg.loss.a = 0.99;
    cfg.loss_a_given = true;
    cfg.comments[""] = kDeskComment;
    return cfg;
  }
  throw Error("unknown preset '" + name + "'; available: " + join(preset_names(), ", "));
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg = make_preset(name);
  cfg.validate();
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"baseline-desk",
          "lsr-desk",
          "kd-cifar100-resnet18-mobilenetv2",
          "rekd-cifar100-resnet18-mobilenetv2",
          "dekd-cifar100-resnet18-teacher",
          "tfself-cifar100-mobilenetv2",
          "tfself-cifar100-resnet18",
          "tfself-imagenet",
          "tfreg-cifar100-mobilenetv2",
          "tfreg-cifar100-resnet18",
          "tfreg-imagenet"};
}

}  // namespace distillkit
