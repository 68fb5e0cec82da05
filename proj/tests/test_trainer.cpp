// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "distillkit/data.hpp"
#include "distillkit/error.hpp"
#include "distillkit/losses.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/optim.hpp"
#include "distillkit/rng.hpp"
#include "distillkit/tensor.hpp"
#include "distillkit/trainer.hpp"

using namespace distillkit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path dir = fs::temp_directory_path() / "distillkit_test_trainer";
  fs::create_directories(dir);
  return dir;
}

OptimSpec flat_optim(double lr0 = 0.1, double momentum = 0.9, double wd = 5e-4) {
  return OptimSpec{.lr0 = lr0, .momentum = momentum, .weight_decay = wd, .milestones = {},
                   .decay_factor = 0.2};
}

RunConfig tiny_cfg(std::uint64_t seed, LossSpec loss, int epochs = 2) {
  auto [train, test] = synth_blobs(3, 20, 6, 0.1, 5);
  RunConfig cfg;
  cfg.train = std::move(train);
  cfg.test = std::move(test);
  cfg.loss = loss;
  cfg.optim = flat_optim();
  cfg.epochs = epochs;
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

ModelDescriptor tiny_desc() { return small_mlp(6, 3); }

bool same_history(const RunHistory& a, const RunHistory& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const EpochRecord& x = a.epochs[i];
    const EpochRecord& y = b.epochs[i];
    if (x.epoch != y.epoch || x.lr != y.lr || x.train_loss != y.train_loss ||
        x.train_acc != y.train_acc || x.test_loss != y.test_loss ||
        x.test_acc != y.test_acc) {
      return false;
    }
  }
  return a.best_test_acc == b.best_test_acc && a.best_epoch == b.best_epoch;
}

bool same_params(const Model& a, const Model& b) {
  if (a.parameters().size() != b.parameters().size()) return false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    auto da = a.parameters()[i].data(), db = b.parameters()[i].data();
    if (da.size() != db.size()) return false;
    for (std::size_t j = 0; j < da.size(); ++j) {
      if (da[j] != db[j]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("evaluate scores a perfect model at one") {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {3};
  desc.hidden_widths = {};
  desc.num_classes = 3;
  Model model = Model::build(desc, 1);
  {
    auto w = model.parameters()[0].mutable_data();
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) w[i * 3 + j] = i == j ? 10.0 : 0.0;
    }
    for (double& v : model.parameters()[1].mutable_data()) v = 0.0;
  }
  std::vector<double> features;
  std::vector<int> labels;
  for (int rep = 0; rep < 4; ++rep) {
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) features.push_back(j == k ? 1.0 : 0.0);
      labels.push_back(k);
    }
  }
  Dataset ds;
  ds.features = Tensor::from({12, 3}, std::move(features));
  ds.labels = std::move(labels);
  ds.num_classes = 3;
  ds.split = "test";

  EvalResult result = evaluate(model, ds);
  CHECK(result.accuracy == 1.0);
  CHECK(result.mean_loss < 1e-3);
}

TEST_CASE("evaluate of an untrained model sits near chance") {
  const std::size_t n = 2000, k = 10, dim = 16;
  Rng rng(77);
  std::vector<double> features(n * dim);
  for (double& v : features) v = rng.normal();
  std::vector<int> labels(n);
  for (int& y : labels) y = static_cast<int>(rng.below(k));
  Dataset ds;
  ds.features = Tensor::from({n, dim}, std::move(features));
  ds.labels = std::move(labels);
  ds.num_classes = k;
  ds.split = "test";

  Model model = Model::build(small_mlp(dim, k), 1);
  double acc = evaluate(model, ds).accuracy;
  double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
  CHECK(std::abs(acc - 0.1) <= 3.0 * sigma);
}

TEST_CASE("evaluate rejects labels outside the class range") {
  Dataset ds;
  ds.features = Tensor::from({2, 4}, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
  ds.labels = {0, 10};
  ds.num_classes = 10;
  ds.split = "test";
  Model model = Model::build(small_mlp(4, 10), 1);
  CHECK_THROWS_WITH_AS((void)evaluate(model, ds), doctest::Contains("out of range"), Error);
}

TEST_CASE("one epoch on near-separable blobs reaches high accuracy") {
  auto [train, test] = synth_blobs(5, 200, 8, 0.05, 3);
  RunConfig cfg;
  cfg.train = std::move(train);
  cfg.test = std::move(test);
  cfg.loss = LossSpec{.kind = LossSpec::Kind::CE};
  cfg.optim = flat_optim();
  cfg.epochs = 1;
  cfg.batch_size = 64;
  cfg.seed = 11;
  RunOutput out = run_baseline(small_mlp(8, 5), cfg);
  REQUIRE(out.history.epochs.size() == 1);
  CHECK(out.history.epochs[0].epoch == 0);
  CHECK(out.history.epochs[0].lr == 0.1);
  CHECK(out.history.epochs[0].train_acc > 0.9);
  CHECK(out.history.epochs[0].test_acc > 0.95);
  CHECK(out.history.best_epoch == 0);
  CHECK(out.history.best_test_acc == out.history.epochs[0].test_acc);
  CHECK(out.history.teacher_test_acc == -1.0);
}

TEST_CASE("training is bit-deterministic in the seed") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunOutput a = run_baseline(tiny_desc(), tiny_cfg(9, ce));
  RunOutput b = run_baseline(tiny_desc(), tiny_cfg(9, ce));
  CHECK(same_history(a.history, b.history));
  CHECK(same_params(a.model, b.model));

  RunOutput c = run_baseline(tiny_desc(), tiny_cfg(10, ce));
  CHECK(a.history.epochs[0].train_loss != c.history.epochs[0].train_loss);
}

TEST_CASE("alpha zero collapses every protocol onto the plain baseline") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunOutput base = run_baseline(tiny_desc(), tiny_cfg(4, ce));

  LossSpec lsr{.kind = LossSpec::Kind::LSR, .alpha = 0.0};
  CHECK(same_history(run_baseline(tiny_desc(), tiny_cfg(4, lsr)).history, base.history));

  fs::path teacher_path = tmp_dir() / "alpha0-teacher.ckpt";
  {
    LossSpec tce{.kind = LossSpec::Kind::CE};
    RunOutput teacher = run_baseline(tiny_desc(), tiny_cfg(99, tce));
    save_checkpoint(teacher.model, teacher_path.string(), CheckpointMeta{});
  }
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.0, .tau = 20.0};
  CHECK(same_history(run_normal_kd(tiny_desc(), teacher_path.string(), tiny_cfg(4, kd)).history,
                     base.history));

  LossSpec reg{.kind = LossSpec::Kind::TfReg, .alpha = 0.0, .tau = 20.0, .a = 0.99};
  CHECK(same_history(run_tf_reg(tiny_desc(), tiny_cfg(4, reg)).history, base.history));

  LossSpec self{.kind = LossSpec::Kind::TfSelf, .alpha = 0.0, .tau = 20.0};
  auto [stage1, stage2] = run_tf_self(tiny_desc(), tiny_cfg(4, self));
  CHECK(same_history(stage2.history, base.history));
}

TEST_CASE("distilling from an identical teacher starts at zero loss") {
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 1.0, .tau = 1.0};
  RunConfig cfg = tiny_cfg(8, kd, /*epochs=*/1);
  cfg.optim = flat_optim(0.05, 0.0, 0.0);

  Model init = Model::build(tiny_desc(), split_seed(cfg.seed, kInitStream));
  fs::path path = tmp_dir() / "identical-teacher.ckpt";
  save_checkpoint(init, path.string(), CheckpointMeta{});

  RunOutput out = run_normal_kd(tiny_desc(), path.string(), cfg);
  // The only deviation is float32 checkpoint rounding of the teacher copy.
  CHECK(out.history.epochs[0].train_loss < 1e-6);
}

TEST_CASE("checkpoint distillation records the teacher's test accuracy") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunOutput teacher = run_baseline(tiny_desc(), tiny_cfg(6, ce));
  fs::path path = tmp_dir() / "acc-teacher.ckpt";
  save_checkpoint(teacher.model, path.string(), CheckpointMeta{});

  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0};
  RunConfig cfg = tiny_cfg(7, kd);
  RunOutput out = run_normal_kd(tiny_desc(), path.string(), cfg);
  CHECK(out.history.teacher_test_acc ==
        evaluate(load_checkpoint(path.string()), cfg.test).accuracy);
}

TEST_CASE("reversed distillation trains a larger model from a smaller checkpoint") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunOutput small = run_baseline(tiny_desc(), tiny_cfg(3, ce));
  fs::path path = tmp_dir() / "rekd-teacher.ckpt";
  save_checkpoint(small.model, path.string(), CheckpointMeta{});

  ModelDescriptor big;
  big.arch = Arch::MLP;
  big.input_shape = {6};
  big.hidden_widths = {32, 16};
  big.num_classes = 3;
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0};
  RunOutput out = run_re_kd(big, path.string(), tiny_cfg(3, kd));
  CHECK(out.history.epochs.size() == 2);
  CHECK(out.history.teacher_test_acc >= 0.0);
  CHECK(out.model.descriptor() == big);
}

TEST_CASE("defective distillation accepts an untrained snapshot teacher") {
  Model init = Model::build(tiny_desc(), split_seed(123, kTeacherInitStream));
  fs::path path = tmp_dir() / "dekd-teacher.ckpt";
  save_checkpoint(init, path.string(), CheckpointMeta{});

  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.95, .tau = 20.0};
  RunConfig cfg = tiny_cfg(2, kd);
  RunOutput out = run_de_kd(tiny_desc(), path.string(), cfg);
  CHECK(out.history.teacher_test_acc ==
        evaluate(load_checkpoint(path.string()), cfg.test).accuracy);
  CHECK(out.history.epochs.size() == 2);
}

TEST_CASE("snapshots capture the init, requested epochs and final state") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunConfig cfg = tiny_cfg(13, ce);
  cfg.snapshot_epochs = {0, 1, 2};
  RunOutput out = run_baseline(tiny_desc(), cfg);
  REQUIRE(out.snapshots.size() == 3);
  CHECK(out.snapshots[0].first == 0);
  CHECK(out.snapshots[1].first == 1);
  CHECK(out.snapshots[2].first == 2);

  Model init = Model::build(tiny_desc(), split_seed(cfg.seed, kInitStream));
  CHECK(same_params(out.snapshots[0].second, init));
  CHECK(same_params(out.snapshots[2].second, out.model));
  CHECK_FALSE(same_params(out.snapshots[1].second, out.model));
}

TEST_CASE("snapshot epochs outside the run are rejected") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunConfig cfg = tiny_cfg(13, ce);
  cfg.snapshot_epochs = {5};
  CHECK_THROWS_WITH_AS((void)run_baseline(tiny_desc(), cfg),
                       doctest::Contains("snapshot epoch"), Error);
}

TEST_CASE("a diverging run aborts with epoch and loss context") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunConfig cfg = tiny_cfg(1, ce, /*epochs=*/10);
  cfg.optim = flat_optim(1e100, 0.9, 0.0);
  try {
    (void)run_baseline(tiny_desc(), cfg);
    FAIL("expected the run to abort");
  } catch (const Error& e) {
    std::string what = e.what();
    CHECK(what.find("epoch ") != std::string::npos);
    CHECK(what.find(", loss ce:") != std::string::npos);
  }
}

TEST_CASE("self-distillation freezes its teacher and reuses it across seeds") {
  LossSpec self{.kind = LossSpec::Kind::TfSelf, .alpha = 0.9, .tau = 6.0};
  RunConfig stage1_cfg = tiny_cfg(21, LossSpec{.kind = LossSpec::Kind::CE});
  RunOutput teacher = train_self_teacher(tiny_desc(), stage1_cfg);
  Model frozen = teacher.model.clone();

  RunOutput a = run_tf_self(tiny_desc(), tiny_cfg(21, self), teacher.model);
  CHECK(same_params(teacher.model, frozen));

  RunOutput b = run_tf_self(tiny_desc(), tiny_cfg(22, self), teacher.model);
  CHECK(same_params(teacher.model, frozen));
  CHECK(a.history.epochs[0].train_loss != b.history.epochs[0].train_loss);

  RunOutput a_again = run_tf_self(tiny_desc(), tiny_cfg(21, self), teacher.model);
  CHECK(same_history(a.history, a_again.history));
}

TEST_CASE("the two-stage runner pretrains from an independent seed stream") {
  LossSpec self{.kind = LossSpec::Kind::TfSelf, .alpha = 0.9, .tau = 6.0};
  auto [stage1, stage2] = run_tf_self(tiny_desc(), tiny_cfg(30, self));
  CHECK(stage1.history.epochs.size() == 2);
  CHECK(stage2.history.epochs.size() == 2);
  // Different init streams: stage 1 and stage 2 start from different weights.
  Model student_init = Model::build(tiny_desc(), split_seed(30, kInitStream));
  Model teacher_init = Model::build(tiny_desc(), split_seed(30, kTeacherInitStream));
  CHECK_FALSE(same_params(student_init, teacher_init));
}

TEST_CASE("self_finetune starts stage two from the teacher's weights") {
  LossSpec self{.kind = LossSpec::Kind::TfSelf, .alpha = 0.5, .tau = 4.0};
  RunOutput teacher = train_self_teacher(tiny_desc(), tiny_cfg(31, LossSpec{}));
  RunConfig cfg = tiny_cfg(31, self);
  cfg.self_finetune = true;
  cfg.optim = flat_optim(1e-6, 0.0, 0.0);  // nearly frozen: exposes the starting point
  RunOutput out = run_tf_self(tiny_desc(), cfg, teacher.model);
  double teacher_acc = evaluate(teacher.model, cfg.test).accuracy;
  CHECK(out.history.epochs[0].test_acc == teacher_acc);
}

TEST_CASE("protocol runners insist on their loss kind") {
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0};
  CHECK_THROWS_WITH_AS((void)run_baseline(tiny_desc(), tiny_cfg(1, kd)),
                       doctest::Contains("needs loss kind ce or lsr, got kd"), Error);
  LossSpec ce{.kind = LossSpec::Kind::CE};
  CHECK_THROWS_WITH_AS((void)run_tf_reg(tiny_desc(), tiny_cfg(1, ce)),
                       doctest::Contains("needs loss kind"), Error);
}

TEST_CASE("teacher checkpoints must match the dataset's class count") {
  Model wrong = Model::build(small_mlp(6, 4), 5);
  fs::path path = tmp_dir() / "wrong-classes.ckpt";
  save_checkpoint(wrong, path.string(), CheckpointMeta{});
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0};
  CHECK_THROWS_WITH_AS((void)run_normal_kd(tiny_desc(), path.string(), tiny_cfg(1, kd)),
                       doctest::Contains("teacher checkpoint has"), Error);
}

TEST_CASE("time_per_step returns a positive duration and validates its inputs") {
  LossSpec ce{.kind = LossSpec::Kind::CE};
  RunConfig cfg = tiny_cfg(1, ce);
  CHECK(time_per_step(tiny_desc(), cfg, ce, 3, 2) > 0.0);
  CHECK_THROWS_WITH_AS((void)time_per_step(tiny_desc(), cfg, ce, 0, 1),
                       doctest::Contains("steps >= 1"), Error);
  LossSpec kd{.kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0};
  CHECK_THROWS_WITH_AS((void)time_per_step(tiny_desc(), cfg, kd, 3, 1),
                       doctest::Contains("needs a teacher"), Error);
}

}  // TEST_SUITE
