// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/trainer.hpp"

#include <algorithm>
#include <chrono>

#include "distillkit/error.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {
namespace {

constexpr std::size_t kEvalBatch = 256;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels) {
  const std::vector<int> predicted = argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i] == labels[i]) ++correct;
  }
  return correct;
}

void expect_loss_kind(const char* who, const LossSpec& loss,
                      std::initializer_list<LossSpec::Kind> allowed) {
  for (LossSpec::Kind kind : allowed) {
    if (loss.kind == kind) return;
  }
  std::string names;
  for (LossSpec::Kind kind : allowed) {
    if (!names.empty()) names += " or ";
    names += to_string(kind);
  }
  throw Error(std::string(who) + " needs loss kind " + names + ", got " +
              to_string(loss.kind));
}

Model load_teacher(const std::string& path, const RunConfig& cfg) {
  Model teacher = load_checkpoint(path);
  if (teacher.descriptor().num_classes != cfg.train.num_classes) {
    throw Error("teacher checkpoint has " +
                std::to_string(teacher.descriptor().num_classes) + " classes, dataset has " +
                std::to_string(cfg.train.num_classes));
  }
  return teacher;
}

}  // namespace

EvalResult evaluate(const Model& model, const Dataset& dataset) {
  dataset.validate();
  NoGradGuard no_grad;
  const std::size_t num_classes = dataset.num_classes;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  LossSpec ce;
  for (const Batch& batch : batches(dataset, kEvalBatch, /*shuffle=*/false, 0, 0)) {
    Tensor logits = model.forward(batch.features);
    Tensor loss = compute_loss(ce, logits, batch.labels, num_classes);
    loss_sum += loss.item() * static_cast<double>(batch.labels.size());
    correct += count_correct(logits, batch.labels);
  }
  EvalResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  result.mean_loss = loss_sum / static_cast<double>(dataset.size());
  return result;
}

RunHistory train(Model& model, const Dataset& train_set, const Dataset& test_set,
                 const LossSpec& loss, const OptimSpec& optim, int epochs,
                 std::size_t batch_size, std::uint64_t seed, const Model* teacher,
                 std::span<const int> snapshot_epochs,
                 std::vector<std::pair<int, Model>>* snapshots) {
  train_set.validate();
  test_set.validate();
  if (train_set.num_classes != test_set.num_classes) {
    throw Error("train and test splits disagree on class count");
  }
  const std::size_t num_classes = train_set.num_classes;
  loss.validate(num_classes);
  optim.validate();
  if (epochs < 1) throw Error("epochs must be at least 1, got " + std::to_string(epochs));
  if (model.descriptor().num_classes != num_classes) {
    throw Error("model has " + std::to_string(model.descriptor().num_classes) +
                " classes, dataset has " + std::to_string(num_classes));
  }
  if (loss.needs_teacher() && teacher == nullptr) {
    throw Error(to_string(loss.kind) + " training requires a teacher model");
  }
  if (teacher != nullptr && teacher->descriptor().num_classes != num_classes) {
    throw Error("teacher has " + std::to_string(teacher->descriptor().num_classes) +
                " classes, dataset has " + std::to_string(num_classes));
  }
  for (int s : snapshot_epochs) {
    if (s < 0 || s > epochs) {
      throw Error("snapshot epoch " + std::to_string(s) + " outside [0, " +
                  std::to_string(epochs) + "]");
    }
  }

  auto maybe_snapshot = [&](int completed_epochs) {
    if (snapshots == nullptr) return;
    if (std::find(snapshot_epochs.begin(), snapshot_epochs.end(), completed_epochs) !=
        snapshot_epochs.end()) {
      snapshots->emplace_back(completed_epochs, model.clone());
    }
  };

  const std::uint64_t shuffle_seed = split_seed(seed, kShuffleStream);
  SgdOptimizer optimizer(model.parameters(), optim);
  RunHistory history;
  const double start = now_seconds();
  maybe_snapshot(0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = lr_at_epoch(optim, epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (const Batch& batch : batches(train_set, batch_size, /*shuffle=*/true, shuffle_seed,
                                      epoch)) {
      try {
        Tensor logits = model.forward(batch.features);
        Tensor teacher_logits;
        if (teacher != nullptr) {
          NoGradGuard no_grad;
          teacher_logits = teacher->forward(batch.features);
        }
        Tensor batch_loss = compute_loss(loss, logits, batch.labels, num_classes,
                                         teacher != nullptr ? &teacher_logits : nullptr);
        loss_sum += batch_loss.item() * static_cast<double>(batch.labels.size());
        correct += count_correct(logits, batch.labels);
        optimizer.zero_grad();
        backward(batch_loss);
        optimizer.step(lr);
      } catch (const Error& e) {
        throw Error("epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_index) + ", loss " + to_string(loss.kind) + ": " +
                    e.what());
      }
      ++batch_index;
    }

    const EvalResult test = evaluate(model, test_set);
    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = loss_sum / static_cast<double>(train_set.size());
    record.train_acc =
        static_cast<double>(correct) / static_cast<double>(train_set.size());
    record.test_loss = test.mean_loss;
    record.test_acc = test.accuracy;
    history.epochs.push_back(record);
    if (record.test_acc > history.best_test_acc || history.best_epoch < 0) {
      history.best_test_acc = record.test_acc;
      history.best_epoch = epoch;
    }
    maybe_snapshot(epoch + 1);
  }
  history.wall_seconds = now_seconds() - start;
  return history;
}

RunOutput run_baseline(const ModelDescriptor& desc, const RunConfig& cfg) {
  expect_loss_kind("run_baseline", cfg.loss, {LossSpec::Kind::CE, LossSpec::Kind::LSR});
  RunOutput out;
  out.model = Model::build(desc, split_seed(cfg.seed, kInitStream));
  out.history = train(out.model, cfg.train, cfg.test, cfg.loss, cfg.optim, cfg.epochs,
                      cfg.batch_size, cfg.seed, nullptr, cfg.snapshot_epochs, &out.snapshots);
  return out;
}

RunOutput run_normal_kd(const ModelDescriptor& student_desc,
                        const std::string& teacher_checkpoint, const RunConfig& cfg) {
  expect_loss_kind("run_normal_kd", cfg.loss, {LossSpec::Kind::KD});
  const Model teacher = load_teacher(teacher_checkpoint, cfg);
  RunOutput out;
  out.model = Model::build(student_desc, split_seed(cfg.seed, kInitStream));
  out.history = train(out.model, cfg.train, cfg.test, cfg.loss, cfg.optim, cfg.epochs,
                      cfg.batch_size, cfg.seed, &teacher, cfg.snapshot_epochs,
                      &out.snapshots);
  out.history.teacher_test_acc = evaluate(teacher, cfg.test).accuracy;
  return out;
}

RunOutput run_re_kd(const ModelDescriptor& teacher_desc,
                    const std::string& student_checkpoint, const RunConfig& cfg) {
  // Reversed KD is normal KD with the roles swapped: train the larger
  // descriptor, let the smaller checkpoint teach.
  return run_normal_kd(teacher_desc, student_checkpoint, cfg);
}

RunOutput run_de_kd(const ModelDescriptor& student_desc,
                    const std::string& poor_teacher_checkpoint, const RunConfig& cfg) {
  // Defective KD differs only in where the checkpoint comes from: an early
  // training snapshot with accuracy far below the student's baseline.
  return run_normal_kd(student_desc, poor_teacher_checkpoint, cfg);
}

RunOutput train_self_teacher(const ModelDescriptor& desc, const RunConfig& cfg) {
  LossSpec ce;
  RunOutput out;
  out.model = Model::build(desc, split_seed(cfg.seed, kTeacherInitStream));
  out.history = train(out.model, cfg.train, cfg.test, ce, cfg.optim, cfg.epochs,
                      cfg.batch_size, cfg.seed, nullptr);
  return out;
}

RunOutput run_tf_self(const ModelDescriptor& desc, const RunConfig& cfg,
                      const Model& teacher) {
  expect_loss_kind("run_tf_self", cfg.loss, {LossSpec::Kind::TfSelf});
  if (!(teacher.descriptor() == desc)) {
    throw Error("self-distillation teacher must share the student's architecture");
  }
  RunOutput out;
  out.model = cfg.self_finetune ? teacher.clone()
                                : Model::build(desc, split_seed(cfg.seed, kInitStream));
  out.history = train(out.model, cfg.train, cfg.test, cfg.loss, cfg.optim, cfg.epochs,
                      cfg.batch_size, cfg.seed, &teacher, cfg.snapshot_epochs,
                      &out.snapshots);
  return out;
}

std::pair<RunOutput, RunOutput> run_tf_self(const ModelDescriptor& desc,
                                            const RunConfig& cfg) {
  RunOutput stage1 = train_self_teacher(desc, cfg);
  RunOutput stage2 = run_tf_self(desc, cfg, stage1.model);
  return {std::move(stage1), std::move(stage2)};
}

RunOutput run_tf_reg(const ModelDescriptor& desc, const RunConfig& cfg) {
  expect_loss_kind("run_tf_reg", cfg.loss, {LossSpec::Kind::TfReg});
  RunOutput out;
  out.model = Model::build(desc, split_seed(cfg.seed, kInitStream));
  out.history = train(out.model, cfg.train, cfg.test, cfg.loss, cfg.optim, cfg.epochs,
                      cfg.batch_size, cfg.seed, nullptr, cfg.snapshot_epochs,
                      &out.snapshots);
  return out;
}

double time_per_step(const ModelDescriptor& desc, const RunConfig& cfg,
                     const LossSpec& loss, int steps, int repeats,
                     const Model* teacher) {
  if (steps < 1 || repeats < 1) throw Error("time_per_step needs steps >= 1, repeats >= 1");
  loss.validate(cfg.train.num_classes);
  if (loss.needs_teacher() && teacher == nullptr) {
    throw Error("time_per_step: " + to_string(loss.kind) + " needs a teacher");
  }
  const Model base = Model::build(desc, split_seed(cfg.seed, kInitStream));
  const std::vector<Batch> fixed =
      batches(cfg.train, cfg.batch_size, /*shuffle=*/true,
              split_seed(cfg.seed, kShuffleStream), 0);

  double best = 0.0;
  for (int rep = 0; rep < repeats; ++rep) {
    Model model = base.clone();
    SgdOptimizer optimizer(model.parameters(), cfg.optim);
    const double start = now_seconds();
    for (int s = 0; s < steps; ++s) {
      const Batch& batch = fixed[static_cast<std::size_t>(s) % fixed.size()];
      Tensor logits = model.forward(batch.features);
      Tensor teacher_logits;
      if (teacher != nullptr) {
        NoGradGuard no_grad;
        teacher_logits = teacher->forward(batch.features);
      }
      Tensor batch_loss = compute_loss(loss, logits, batch.labels, cfg.train.num_classes,
                                       teacher != nullptr ? &teacher_logits : nullptr);
      optimizer.zero_grad();
      backward(batch_loss);
      optimizer.step(cfg.optim.lr0);
    }
    const double elapsed = now_seconds() - start;
    if (rep == 0 || elapsed < best) best = elapsed;
  }
  return best / static_cast<double>(steps);
}

}  // namespace distillkit
