// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/optim.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "distillkit/error.hpp"

namespace distillkit {

void OptimSpec::validate() const {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) {
    throw Error("lr0 must be positive, got " + std::to_string(lr0));
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error("momentum must lie in [0, 1), got " + std::to_string(momentum));
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw Error("weight_decay must be nonnegative, got " + std::to_string(weight_decay));
  }
  if (!(decay_factor > 0.0) || !std::isfinite(decay_factor)) {
    throw Error("decay_factor must be positive, got " + std::to_string(decay_factor));
  }
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw Error("milestones must be strictly increasing");
    }
  }
}

double lr_at_epoch(const OptimSpec& spec, int epoch) {
  if (epoch < 0) throw Error("epoch must be nonnegative, got " + std::to_string(epoch));
  double lr = spec.lr0;
  for (int m : spec.milestones) {
    if (m <= epoch) lr *= spec.decay_factor;
  }
  return lr;
}

double batch_scaled_lr(double lr_base, std::size_t batch_size, std::size_t ref_batch) {
  if (!(lr_base > 0.0)) throw Error("lr_base must be positive");
  if (batch_size == 0 || ref_batch == 0) throw Error("batch sizes must be positive");
  return lr_base * static_cast<double>(batch_size) / static_cast<double>(ref_batch);
}

void sgd_step(std::span<double> params, std::span<const double> grads,
              std::span<double> velocity, double lr, double momentum, double weight_decay) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw Error("sgd_step buffer sizes differ: params " + std::to_string(params.size()) +
                ", grads " + std::to_string(grads.size()) + ", velocity " +
                std::to_string(velocity.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + weight_decay * params[i];
    velocity[i] = momentum * velocity[i] + g;
    params[i] -= lr * velocity[i];
    if (!std::isfinite(params[i])) {
      throw Error("non-finite parameter update at element " + std::to_string(i));
    }
  }
}

SgdOptimizer::SgdOptimizer(std::vector<Tensor> params, OptimSpec spec)
    : params_(std::move(params)), spec_(std::move(spec)) {
  spec_.validate();
  velocity_.reserve(params_.size());
  for (const Tensor& p : params_) {
    if (!p.defined() || !p.requires_grad() || !p.node()->is_leaf()) {
      throw Error("optimizer parameters must be gradient-tracking leaves");
    }
    velocity_.emplace_back(p.size(), 0.0);
  }
}

void SgdOptimizer::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    std::span<const double> g = p.grad();
    if (g.empty()) {
      // Leaf untouched by the last backward pass: gradient is zero, but
      // weight decay still applies.
      static thread_local std::vector<double> zeros;
      zeros.assign(p.size(), 0.0);
      g = zeros;
    }
    sgd_step(p.mutable_data(), g, velocity_[i], lr, spec_.momentum, spec_.weight_decay);
  }
}

void SgdOptimizer::zero_grad() {
  distillkit::zero_grad(params_);
}

}  // namespace distillkit
