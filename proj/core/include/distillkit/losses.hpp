// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "distillkit/tensor.hpp"

namespace distillkit {

// Probability table over K classes, shape [K] or [N,K]. Always detached from
// the autodiff graph: targets built from a Distribution never receive
// gradients. Rows must be nonnegative and sum to 1 within 1e-9.
class Distribution {
 public:
  Distribution() = default;

  static Distribution from_tensor(const Tensor& probs);
  static Distribution from_row(std::vector<double> probs);
  static Distribution uniform(std::size_t num_classes);
  static Distribution uniform(std::size_t rows, std::size_t num_classes);
  static Distribution one_hot(std::span<const int> labels, std::size_t num_classes);
  static Distribution one_hot(int label, std::size_t num_classes);

  bool defined() const { return probs_.defined(); }
  const Tensor& probs() const { return probs_; }
  std::size_t num_classes() const;
  std::size_t rows() const;
  double at(std::size_t row, std::size_t k) const;
  // Per-row argmax, ties resolved toward the lowest class index.
  std::vector<int> argmax() const;

 private:
  explicit Distribution(Tensor probs) : probs_(std::move(probs)) {}
  Tensor probs_;
};

// Which training loss to apply, plus its hyperparameters.
//   CE     cross-entropy on one-hot labels
//   LSR    label smoothing: (1-alpha) H(q,p) + alpha KL(u || p)
//   KD     distillation:    (1-alpha) H(q,p) + alpha KL(t_tau || p_tau)
//   TfSelf KD against a frozen pre-trained copy of the same architecture
//   TfReg  KD against the manually designed two-level virtual teacher
struct LossSpec {
  enum class Kind { CE, LSR, KD, TfSelf, TfReg };

  Kind kind = Kind::CE;
  double alpha = 0.0;
  double tau = 1.0;
  double a = 0.99;  // virtual-teacher probability of the correct class
  bool tau_squared_scaling = false;

  bool needs_teacher() const { return kind == Kind::KD || kind == Kind::TfSelf; }
  void validate(std::size_t num_classes) const;
};

std::string to_string(LossSpec::Kind kind);
LossSpec::Kind loss_kind_from_string(const std::string& name);

// softmax(z / tau), numerically stable; tau=1 is the plain softmax, large tau
// flattens toward uniform while preserving the argmax. Detached.
Distribution softmax_temperature(const Tensor& logits, double tau);

// H(q, p) = -sum_k q(k) log p(k); batched inputs return the batch mean.
// Differentiable through log_p only.
Tensor cross_entropy(const Distribution& q, const Tensor& log_p);

// H(p) = -sum_k p(k) log p(k) with 0 log 0 := 0; batched inputs return the
// batch mean.
double entropy(const Distribution& p);

// KL(target || p) = sum_k target(k) (log target(k) - log p(k)), batch mean.
// The target is a constant: gradients flow only through log_p.
Tensor kl_divergence(const Distribution& target, const Tensor& log_p);

// (1-alpha) one_hot(y) + alpha / K per class.
Distribution smoothed_labels(std::span<const int> labels, std::size_t num_classes, double alpha);
Distribution smoothed_labels(int label, std::size_t num_classes, double alpha);

// Label-smoothing loss (1-alpha) H(q,p) + alpha KL(u || p).
Tensor lsr_loss(const Tensor& logits, std::span<const int> labels, std::size_t num_classes,
                double alpha);
// The same objective in its direct form H(q', p) over smoothed labels; equals
// lsr_loss up to the constant alpha * H(u).
Tensor lsr_loss_direct(const Tensor& logits, std::span<const int> labels,
                       std::size_t num_classes, double alpha);

// Distillation loss (1-alpha) H(q,p) + alpha KL(t_tau || p_tau). The hard
// term uses tau=1 probabilities; the KL term softens both sides by tau and is
// additionally scaled by tau^2 when tau_squared_scaling is set. The teacher
// is frozen: no gradient flows into teacher_logits.
Tensor kd_loss(const Tensor& student_logits, const Tensor& teacher_logits,
               std::span<const int> labels, double alpha, double tau,
               bool tau_squared_scaling = false);

// (1-alpha) one_hot(y) + alpha teacher_probs: the smoothed target a
// tau=1 distillation loss optimizes, up to a constant.
Distribution combined_smoothed_target(std::span<const int> labels,
                                      const Distribution& teacher_probs, double alpha);

// Two-level teacher with probability `a` at the correct class and
// (1-a)/(K-1) elsewhere; argmax equals the label for every a > 1/K.
Distribution virtual_teacher(std::span<const int> labels, std::size_t num_classes, double a);
Distribution virtual_teacher(int label, std::size_t num_classes, double a);

// Temperature applied to an existing distribution: softmax(log p / tau),
// i.e. p^(1/tau) renormalized per row. tau=1 returns the input unchanged;
// zero entries keep zero mass (the a=1 one-hot teacher stays one-hot).
Distribution soften_distribution(const Distribution& p, double tau);

// Self-distillation: kd_loss against logits of a frozen pre-trained snapshot
// of the same architecture.
Tensor tf_kd_self_loss(const Tensor& student_logits, const Tensor& frozen_teacher_logits,
                       std::span<const int> labels, double alpha, double tau);

// Virtual-teacher distillation: kd_loss against the softened two-level
// teacher. No teacher network is involved.
Tensor tf_kd_reg_loss(const Tensor& student_logits, std::span<const int> labels,
                      std::size_t num_classes, double alpha, double tau, double a);

// Dispatch on LossSpec; teacher_logits is required for KD and TfSelf and
// ignored otherwise.
Tensor compute_loss(const LossSpec& spec, const Tensor& student_logits,
                    std::span<const int> labels, std::size_t num_classes,
                    const Tensor* teacher_logits = nullptr);

// Per-row argmax of [N,K] (or [K]) values, ties toward the lowest index.
std::vector<int> argmax_rows(const Tensor& values);

}  // namespace distillkit
