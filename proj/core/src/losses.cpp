// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "distillkit/error.hpp"

namespace distillkit {
namespace {

constexpr double kRowSumTolerance = 1e-9;

void check_num_classes(std::size_t num_classes) {
  if (num_classes < 2) {
    throw Error("need at least 2 classes, got " + std::to_string(num_classes));
  }
}

void check_label(int label, std::size_t num_classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
    throw Error("label " + std::to_string(label) + " out of range for " +
                std::to_string(num_classes) + " classes");
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error("tau must be positive and finite, got " + std::to_string(tau));
  }
}

// Views a [K] or [N,K] tensor as [N,K]; rank-1 input becomes a single row.
// Reshape keeps the result differentiable through the original tensor.
Tensor as_batch(const Tensor& t, const char* what) {
  if (t.rank() == 1) return reshape(t, {1, t.shape()[0]});
  if (t.rank() == 2) return t;
  throw Error(std::string(what) + " must have rank 1 or 2, got shape " + shape_str(t.shape()));
}

}  // namespace

Distribution Distribution::from_tensor(const Tensor& probs) {
  if (!probs.defined()) throw Error("distribution built from undefined tensor");
  if (probs.rank() != 1 && probs.rank() != 2) {
    throw Error("distribution must have rank 1 or 2, got shape " + shape_str(probs.shape()));
  }
  const std::size_t cols = probs.shape().back();
  check_num_classes(cols);
  std::span<const double> values = probs.data();
  const std::size_t row_count = values.size() / cols;
  for (std::size_t r = 0; r < row_count; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = values[r * cols + k];
      if (!(v >= 0.0)) {
        throw Error("distribution entries must be nonnegative, row " + std::to_string(r) +
                    " has " + std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error("distribution row " + std::to_string(r) + " sums to " + std::to_string(sum) +
                  ", expected 1");
    }
  }
  return Distribution(Tensor::from(probs.shape(),
                                   std::vector<double>(values.begin(), values.end())));
}

Distribution Distribution::from_row(std::vector<double> probs) {
  // Size read before the move: argument evaluation order is unspecified.
  const std::size_t num_classes = probs.size();
  return from_tensor(Tensor::from({num_classes}, std::move(probs)));
}

Distribution Distribution::uniform(std::size_t num_classes) {
  check_num_classes(num_classes);
  return Distribution(Tensor::filled({num_classes}, 1.0 / static_cast<double>(num_classes)));
}

Distribution Distribution::uniform(std::size_t rows, std::size_t num_classes) {
  check_num_classes(num_classes);
  if (rows == 0) throw Error("distribution needs at least one row");
  return Distribution(
      Tensor::filled({rows, num_classes}, 1.0 / static_cast<double>(num_classes)));
}

Distribution Distribution::one_hot(std::span<const int> labels, std::size_t num_classes) {
  check_num_classes(num_classes);
  if (labels.empty()) throw Error("one_hot needs at least one label");
  std::vector<double> values(labels.size() * num_classes, 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], num_classes);
    values[r * num_classes + static_cast<std::size_t>(labels[r])] = 1.0;
  }
  return Distribution(Tensor::from({labels.size(), num_classes}, std::move(values)));
}

Distribution Distribution::one_hot(int label, std::size_t num_classes) {
  check_num_classes(num_classes);
  check_label(label, num_classes);
  std::vector<double> values(num_classes, 0.0);
  values[static_cast<std::size_t>(label)] = 1.0;
  return Distribution(Tensor::from({num_classes}, std::move(values)));
}

std::size_t Distribution::num_classes() const {
  if (!defined()) throw Error("num_classes of undefined distribution");
  return probs_.shape().back();
}

std::size_t Distribution::rows() const {
  if (!defined()) throw Error("rows of undefined distribution");
  return probs_.size() / num_classes();
}

double Distribution::at(std::size_t row, std::size_t k) const {
  const std::size_t cols = num_classes();
  if (row >= rows() || k >= cols) {
    throw Error("distribution index (" + std::to_string(row) + ", " + std::to_string(k) +
                ") out of range");
  }
  return probs_.data()[row * cols + k];
}

std::vector<int> Distribution::argmax() const {
  const std::size_t cols = num_classes();
  const std::size_t row_count = rows();
  std::span<const double> values = probs_.data();
  std::vector<int> out(row_count);
  for (std::size_t r = 0; r < row_count; ++r) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < cols; ++k) {
      if (values[r * cols + k] > values[r * cols + best]) best = k;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

void LossSpec::validate(std::size_t num_classes) const {
  check_num_classes(num_classes);
  check_alpha(alpha);
  check_tau(tau);
  if (kind == Kind::TfReg) {
    if (!(a >= 0.9 && a <= 1.0)) {
      throw Error("virtual-teacher peak probability must lie in [0.9, 1], got " +
                  std::to_string(a));
    }
  }
}

std::string to_string(LossSpec::Kind kind) {
  switch (kind) {
    case LossSpec::Kind::CE: return "ce";
    case LossSpec::Kind::LSR: return "lsr";
    case LossSpec::Kind::KD: return "kd";
    case LossSpec::Kind::TfSelf: return "tf-self";
    case LossSpec::Kind::TfReg: return "tf-reg";
  }
  throw Error("unknown loss kind");
}

LossSpec::Kind loss_kind_from_string(const std::string& name) {
  if (name == "ce") return LossSpec::Kind::CE;
  if (name == "lsr") return LossSpec::Kind::LSR;
  if (name == "kd") return LossSpec::Kind::KD;
  if (name == "tf-self") return LossSpec::Kind::TfSelf;
  if (name == "tf-reg") return LossSpec::Kind::TfReg;
  throw Error("unknown loss kind '" + name + "', expected ce, lsr, kd, tf-self or tf-reg");
}

Distribution softmax_temperature(const Tensor& logits, double tau) {
  check_tau(tau);
  if (!logits.defined()) throw Error("softmax_temperature of undefined tensor");
  if (logits.rank() != 1 && logits.rank() != 2) {
    throw Error("logits must have rank 1 or 2, got shape " + shape_str(logits.shape()));
  }
  const std::size_t cols = logits.shape().back();
  check_num_classes(cols);
  std::span<const double> z = logits.data();
  const std::size_t row_count = z.size() / cols;
  std::vector<double> out(z.size());
  for (std::size_t r = 0; r < row_count; ++r) {
    double m = z[r * cols];
    for (std::size_t k = 1; k < cols; ++k) m = std::max(m, z[r * cols + k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      const double e = std::exp((z[r * cols + k] - m) / tau);
      out[r * cols + k] = e;
      sum += e;
    }
    for (std::size_t k = 0; k < cols; ++k) out[r * cols + k] /= sum;
  }
  return Distribution::from_tensor(Tensor::from(logits.shape(), std::move(out)));
}

Tensor cross_entropy(const Distribution& q, const Tensor& log_p) {
  if (!q.defined()) throw Error("cross_entropy with undefined target");
  Tensor qb = as_batch(q.probs(), "cross_entropy target");
  Tensor lp = as_batch(log_p, "cross_entropy log-probabilities");
  if (qb.shape() != lp.shape()) {
    throw Error("cross_entropy shape mismatch: target " + shape_str(qb.shape()) +
                " vs log-probabilities " + shape_str(lp.shape()));
  }
  const double n = static_cast<double>(qb.shape()[0]);
  return scalar_mul(sum(mul_elementwise(qb, lp)), -1.0 / n);
}

double entropy(const Distribution& p) {
  if (!p.defined()) throw Error("entropy of undefined distribution");
  const std::size_t cols = p.num_classes();
  const std::size_t row_count = p.rows();
  std::span<const double> values = p.probs().data();
  double total = 0.0;
  for (std::size_t r = 0; r < row_count; ++r) {
    double h = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = values[r * cols + k];
      if (v > 0.0) h -= v * std::log(v);
    }
    total += h;
  }
  return total / static_cast<double>(row_count);
}

Tensor kl_divergence(const Distribution& target, const Tensor& log_p) {
  Tensor ce = cross_entropy(target, log_p);
  return sub(ce, Tensor::scalar(entropy(target)));
}

Distribution smoothed_labels(std::span<const int> labels, std::size_t num_classes,
                             double alpha) {
  check_num_classes(num_classes);
  check_alpha(alpha);
  if (labels.empty()) throw Error("smoothed_labels needs at least one label");
  const double off = alpha / static_cast<double>(num_classes);
  std::vector<double> values(labels.size() * num_classes, off);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], num_classes);
    values[r * num_classes + static_cast<std::size_t>(labels[r])] += 1.0 - alpha;
  }
  return Distribution::from_tensor(
      Tensor::from({labels.size(), num_classes}, std::move(values)));
}

Distribution smoothed_labels(int label, std::size_t num_classes, double alpha) {
  const int labels[1] = {label};
  Distribution batched = smoothed_labels(std::span<const int>(labels), num_classes, alpha);
  std::span<const double> values = batched.probs().data();
  return Distribution::from_tensor(
      Tensor::from({num_classes}, std::vector<double>(values.begin(), values.end())));
}

Tensor lsr_loss(const Tensor& logits, std::span<const int> labels, std::size_t num_classes,
                double alpha) {
  check_alpha(alpha);
  Tensor lb = as_batch(logits, "logits");
  if (lb.shape()[0] != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(lb.shape()[0]) + " logit rows");
  }
  Tensor log_p = log_softmax(lb, 1);
  Tensor hard = cross_entropy(Distribution::one_hot(labels, num_classes), log_p);
  Tensor smooth = kl_divergence(Distribution::uniform(labels.size(), num_classes), log_p);
  return add(scalar_mul(hard, 1.0 - alpha), scalar_mul(smooth, alpha));
}

Tensor lsr_loss_direct(const Tensor& logits, std::span<const int> labels,
                       std::size_t num_classes, double alpha) {
  Tensor lb = as_batch(logits, "logits");
  if (lb.shape()[0] != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(lb.shape()[0]) + " logit rows");
  }
  return cross_entropy(smoothed_labels(labels, num_classes, alpha), log_softmax(lb, 1));
}

Tensor kd_loss(const Tensor& student_logits, const Tensor& teacher_logits,
               std::span<const int> labels, double alpha, double tau,
               bool tau_squared_scaling) {
  check_alpha(alpha);
  check_tau(tau);
  if (!teacher_logits.defined()) throw Error("kd_loss requires teacher logits");
  if (student_logits.shape() != teacher_logits.shape()) {
    throw Error("student logits " + shape_str(student_logits.shape()) +
                " and teacher logits " + shape_str(teacher_logits.shape()) +
                " must have the same shape");
  }
  Tensor sb = as_batch(student_logits, "student logits");
  const std::size_t num_classes = sb.shape()[1];
  check_num_classes(num_classes);
  if (sb.shape()[0] != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(sb.shape()[0]) + " logit rows");
  }
  Tensor hard = cross_entropy(Distribution::one_hot(labels, num_classes), log_softmax(sb, 1));
  Distribution teacher_soft = softmax_temperature(teacher_logits, tau);
  Tensor log_p_tau = log_softmax(scalar_mul(sb, 1.0 / tau), 1);
  Tensor soft = kl_divergence(teacher_soft, log_p_tau);
  const double soft_weight = alpha * (tau_squared_scaling ? tau * tau : 1.0);
  return add(scalar_mul(hard, 1.0 - alpha), scalar_mul(soft, soft_weight));
}

Distribution combined_smoothed_target(std::span<const int> labels,
                                      const Distribution& teacher_probs, double alpha) {
  check_alpha(alpha);
  if (!teacher_probs.defined()) throw Error("combined_smoothed_target with undefined teacher");
  const std::size_t num_classes = teacher_probs.num_classes();
  if (teacher_probs.rows() != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(teacher_probs.rows()) + " teacher rows");
  }
  std::span<const double> t = teacher_probs.probs().data();
  std::vector<double> values(labels.size() * num_classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double hard = (static_cast<std::size_t>(labels[r]) == k) ? 1.0 : 0.0;
      values[r * num_classes + k] = (1.0 - alpha) * hard + alpha * t[r * num_classes + k];
    }
  }
  return Distribution::from_tensor(
      Tensor::from({labels.size(), num_classes}, std::move(values)));
}

Distribution virtual_teacher(std::span<const int> labels, std::size_t num_classes, double a) {
  check_num_classes(num_classes);
  if (labels.empty()) throw Error("virtual_teacher needs at least one label");
  if (!(a <= 1.0 && a > 1.0 / static_cast<double>(num_classes))) {
    throw Error("virtual-teacher peak probability must lie in (1/K, 1], got " +
                std::to_string(a));
  }
  const double off = (1.0 - a) / static_cast<double>(num_classes - 1);
  std::vector<double> values(labels.size() * num_classes, off);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], num_classes);
    values[r * num_classes + static_cast<std::size_t>(labels[r])] = a;
  }
  return Distribution::from_tensor(
      Tensor::from({labels.size(), num_classes}, std::move(values)));
}

Distribution virtual_teacher(int label, std::size_t num_classes, double a) {
  const int labels[1] = {label};
  Distribution batched = virtual_teacher(std::span<const int>(labels), num_classes, a);
  std::span<const double> values = batched.probs().data();
  return Distribution::from_tensor(
      Tensor::from({num_classes}, std::vector<double>(values.begin(), values.end())));
}

Distribution soften_distribution(const Distribution& p, double tau) {
  check_tau(tau);
  if (!p.defined()) throw Error("soften_distribution of undefined distribution");
  if (tau == 1.0) return p;
  const std::size_t cols = p.num_classes();
  const std::size_t row_count = p.rows();
  std::span<const double> values = p.probs().data();
  std::vector<double> out(values.size());
  for (std::size_t r = 0; r < row_count; ++r) {
    double pm = 0.0;
    for (std::size_t k = 0; k < cols; ++k) pm = std::max(pm, values[r * cols + k]);
    const double log_pm = std::log(pm);
    double sum = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = values[r * cols + k];
      // Zero mass stays zero: p^(1/tau) has limit 0, so the one-hot teacher
      // is a fixed point of softening at every temperature.
      const double w = (v > 0.0) ? std::exp((std::log(v) - log_pm) / tau) : 0.0;
      out[r * cols + k] = w;
      sum += w;
    }
    for (std::size_t k = 0; k < cols; ++k) out[r * cols + k] /= sum;
  }
  return Distribution::from_tensor(Tensor::from(p.probs().shape(), std::move(out)));
}

Tensor tf_kd_self_loss(const Tensor& student_logits, const Tensor& frozen_teacher_logits,
                       std::span<const int> labels, double alpha, double tau) {
  return kd_loss(student_logits, frozen_teacher_logits, labels, alpha, tau, false);
}

Tensor tf_kd_reg_loss(const Tensor& student_logits, std::span<const int> labels,
                      std::size_t num_classes, double alpha, double tau, double a) {
  check_alpha(alpha);
  check_tau(tau);
  Tensor sb = as_batch(student_logits, "student logits");
  if (sb.shape()[1] != num_classes) {
    throw Error("logits have " + std::to_string(sb.shape()[1]) + " columns, expected " +
                std::to_string(num_classes));
  }
  if (sb.shape()[0] != labels.size()) {
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(sb.shape()[0]) + " logit rows");
  }
  Tensor hard = cross_entropy(Distribution::one_hot(labels, num_classes), log_softmax(sb, 1));
  Distribution teacher = soften_distribution(virtual_teacher(labels, num_classes, a), tau);
  Tensor log_p_tau = log_softmax(scalar_mul(sb, 1.0 / tau), 1);
  Tensor soft = kl_divergence(teacher, log_p_tau);
  return add(scalar_mul(hard, 1.0 - alpha), scalar_mul(soft, alpha));
}

Tensor compute_loss(const LossSpec& spec, const Tensor& student_logits,
                    std::span<const int> labels, std::size_t num_classes,
                    const Tensor* teacher_logits) {
  spec.validate(num_classes);
  if (spec.needs_teacher() && (teacher_logits == nullptr || !teacher_logits->defined())) {
    throw Error(to_string(spec.kind) + " loss requires teacher logits");
  }
  switch (spec.kind) {
    case LossSpec::Kind::CE: {
      Tensor lb = as_batch(student_logits, "logits");
      if (lb.shape()[0] != labels.size()) {
        throw Error("got " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(lb.shape()[0]) + " logit rows");
      }
      return cross_entropy(Distribution::one_hot(labels, num_classes), log_softmax(lb, 1));
    }
    case LossSpec::Kind::LSR:
      return lsr_loss(student_logits, labels, num_classes, spec.alpha);
    case LossSpec::Kind::KD:
      return kd_loss(student_logits, *teacher_logits, labels, spec.alpha, spec.tau,
                     spec.tau_squared_scaling);
    case LossSpec::Kind::TfSelf:
      return tf_kd_self_loss(student_logits, *teacher_logits, labels, spec.alpha, spec.tau);
    case LossSpec::Kind::TfReg:
      return tf_kd_reg_loss(student_logits, labels, num_classes, spec.alpha, spec.tau,
                            spec.a);
  }
  throw Error("unknown loss kind");
}

std::vector<int> argmax_rows(const Tensor& values) {
  if (!values.defined()) throw Error("argmax_rows of undefined tensor");
  if (values.rank() != 1 && values.rank() != 2) {
    throw Error("argmax_rows expects rank 1 or 2, got shape " + shape_str(values.shape()));
  }
  const std::size_t cols = values.shape().back();
  if (cols == 0) throw Error("argmax_rows of empty rows");
  std::span<const double> v = values.data();
  const std::size_t row_count = v.size() / cols;
  std::vector<int> out(row_count);
  for (std::size_t r = 0; r < row_count; ++r) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < cols; ++k) {
      if (v[r * cols + k] > v[r * cols + best]) best = k;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace distillkit
