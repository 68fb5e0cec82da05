// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the loss forward/backward passes and for a full
// optimizer step, comparing plain cross-entropy with the distillation
// variants. The virtual-teacher loss is designed to cost the same as plain
// cross-entropy per step; bench_step_* puts a number on that.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "distillkit/data.hpp"
#include "distillkit/losses.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/optim.hpp"
#include "distillkit/rng.hpp"
#include "distillkit/tensor.hpp"

namespace {

using namespace distillkit;

constexpr std::size_t kBatch = 64;
constexpr std::size_t kClasses = 10;

struct LossFixture {
  Tensor student;
  Tensor teacher;
  std::vector<int> labels;

  explicit LossFixture(bool track_gradients) {
    Rng rng(7);
    std::vector<double> s(kBatch * kClasses), t(kBatch * kClasses);
    for (double& v : s) v = rng.normal();
    for (double& v : t) v = rng.normal();
    student = Tensor::from({kBatch, kClasses}, std::move(s), track_gradients);
    teacher = Tensor::from({kBatch, kClasses}, std::move(t));
    labels.resize(kBatch);
    for (int& y : labels) y = static_cast<int>(rng.below(kClasses));
  }
};

Tensor loss_of(const LossSpec& spec, const LossFixture& fx) {
  return compute_loss(spec, fx.student, fx.labels, kClasses,
                      spec.needs_teacher() ? &fx.teacher : nullptr);
}

LossSpec spec_of(LossSpec::Kind kind) {
  LossSpec spec;
  spec.kind = kind;
  switch (kind) {
    case LossSpec::Kind::CE:
      break;
    case LossSpec::Kind::LSR:
      spec.alpha = 0.1;
      break;
    case LossSpec::Kind::KD:
    case LossSpec::Kind::TfSelf:
      spec.alpha = 0.95;
      spec.tau = 20.0;
      break;
    case LossSpec::Kind::TfReg:
      spec.alpha = 0.1;
      spec.tau = 20.0;
      spec.a = 0.99;
      break;
  }
  return spec;
}

void bench_loss_forward(benchmark::State& state, LossSpec::Kind kind) {
  NoGradGuard guard;
  const LossFixture fx(false);
  const LossSpec spec = spec_of(kind);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_of(spec, fx).item());
  }
}

void bench_loss_backward(benchmark::State& state, LossSpec::Kind kind) {
  LossFixture fx(true);
  const LossSpec spec = spec_of(kind);
  for (auto _ : state) {
    fx.student.zero_grad();
    const Tensor loss = loss_of(spec, fx);
    loss.backward();
    benchmark::DoNotOptimize(fx.student.grad().data());
  }
}

// One forward/backward/update step of the desk-scale MLP on synthetic data.
void bench_step(benchmark::State& state, LossSpec::Kind kind) {
  auto [train, test] = synth_blobs(kClasses, 40, 32, 0.35, 1);
  (void)test;
  Model model = Model::build(small_mlp(32, kClasses), 1);
  const OptimSpec optim{.lr0 = 0.05,
                        .momentum = 0.9,
                        .weight_decay = 5e-4,
                        .milestones = {},
                        .decay_factor = 0.2};
  SgdOptimizer sgd(model.parameters(), optim);
  const LossSpec spec = spec_of(kind);
  const std::vector<Batch> batch_list = batches(train, kBatch, false, 1, 0);
  const Batch& batch = batch_list.front();
  for (auto _ : state) {
    zero_grad(model.parameters());
    const Tensor logits = model.forward(batch.features);
    const Tensor loss = compute_loss(spec, logits, batch.labels, kClasses);
    loss.backward();
    sgd.step(lr_at_epoch(optim, 0));
    benchmark::DoNotOptimize(model.parameters().front().data().data());
  }
}

BENCHMARK_CAPTURE(bench_loss_forward, ce, LossSpec::Kind::CE);
BENCHMARK_CAPTURE(bench_loss_forward, lsr, LossSpec::Kind::LSR);
BENCHMARK_CAPTURE(bench_loss_forward, kd, LossSpec::Kind::KD);
BENCHMARK_CAPTURE(bench_loss_forward, tf_reg, LossSpec::Kind::TfReg);

BENCHMARK_CAPTURE(bench_loss_backward, ce, LossSpec::Kind::CE);
BENCHMARK_CAPTURE(bench_loss_backward, lsr, LossSpec::Kind::LSR);
BENCHMARK_CAPTURE(bench_loss_backward, kd, LossSpec::Kind::KD);
BENCHMARK_CAPTURE(bench_loss_backward, tf_reg, LossSpec::Kind::TfReg);

BENCHMARK_CAPTURE(bench_step, ce, LossSpec::Kind::CE);
BENCHMARK_CAPTURE(bench_step, tf_reg, LossSpec::Kind::TfReg);

}  // namespace

BENCHMARK_MAIN();
