// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "distillkit/tensor.hpp"

namespace distillkit {

// SGD recipe: initial learning rate, heavy-ball momentum, L2 weight decay,
// and a step schedule that multiplies the rate by decay_factor at each
// milestone epoch.
struct OptimSpec {
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<int> milestones;
  double decay_factor = 0.2;

  void validate() const;
};

// lr0 * decay_factor^(number of milestones <= epoch).
double lr_at_epoch(const OptimSpec& spec, int epoch);

// Linear scaling rule: lr_base * batch_size / ref_batch.
double batch_scaled_lr(double lr_base, std::size_t batch_size, std::size_t ref_batch);

// One in-place update on a flat parameter buffer:
//   g' = grad + weight_decay * param
//   velocity = momentum * velocity + g'
//   param -= lr * velocity
void sgd_step(std::span<double> params, std::span<const double> grads,
              std::span<double> velocity, double lr, double momentum, double weight_decay);

// Applies sgd_step across a model's parameter tensors. Velocity buffers are
// zero-initialized and owned here; the optimizer shares the parameter nodes,
// so step() mutates the model in place.
class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Tensor> params, OptimSpec spec);

  const OptimSpec& spec() const { return spec_; }
  void step(double lr);
  void zero_grad();

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  OptimSpec spec_;
};

}  // namespace distillkit
