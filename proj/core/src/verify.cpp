// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/verify.hpp"

#include <cmath>
#include <cstdio>
#include <span>

#include "distillkit/losses.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/rng.hpp"
#include "distillkit/tensor.hpp"

namespace distillkit {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Tensor random_logits(Rng& rng, std::size_t rows, std::size_t k, double scale,
                     bool requires_grad = false) {
  std::vector<double> values(rows * k);
  for (double& v : values) v = (rng.uniform() * 2.0 - 1.0) * scale;
  return Tensor::from({rows, k}, std::move(values), requires_grad);
}

std::vector<int> random_labels(Rng& rng, std::size_t rows, std::size_t k) {
  std::vector<int> labels(rows);
  for (int& l : labels) l = static_cast<int>(rng.below(k));
  return labels;
}

// KL(uniform || p) for one row, in plain doubles.
double kl_uniform_row(const Distribution& p, std::size_t row) {
  const double u = 1.0 / static_cast<double>(p.num_classes());
  double kl = 0.0;
  for (std::size_t c = 0; c < p.num_classes(); ++c) {
    kl += u * (std::log(u) - std::log(p.at(row, c)));
  }
  return kl;
}

CheckResult check_smoothing_decomposition(std::uint64_t seed) {
  NoGradGuard guard;
  Rng rng(split_seed(seed, 101));
  const std::size_t class_counts[] = {2, 5, 10, 100};
  const double tol = 1e-9;
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t k : class_counts) {
    for (int c = 0; c < 300; ++c) {
      const Tensor logits = random_logits(rng, 1, k, 8.0);
      const std::vector<int> labels = random_labels(rng, 1, k);
      const double alpha = rng.uniform();
      // Mixture form: hard cross-entropy plus uniform KL plus the constant
      // uniform entropy log K.
      const double mixture = lsr_loss(logits, labels, k, alpha).item() +
                             alpha * std::log(static_cast<double>(k));
      // Direct form: one cross-entropy against the smoothed label vector.
      const double direct = lsr_loss_direct(logits, labels, k, alpha).item();
      worst = std::max(worst, std::abs(mixture - direct));
      ++cases;
    }
  }
  return {"smoothing-decomposition", worst <= tol,
          "max |mixture - direct| = " + fmt(worst) + " over " + std::to_string(cases) +
              " cases (tol " + fmt(tol) + ")"};
}

CheckResult check_distillation_equals_smoothed_target(std::uint64_t seed) {
  NoGradGuard guard;
  Rng rng(split_seed(seed, 102));
  const std::size_t class_counts[] = {2, 5, 10, 100};
  const double tol = 1e-9;
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t k : class_counts) {
    for (int c = 0; c < 300; ++c) {
      const Tensor student = random_logits(rng, 1, k, 8.0);
      const Tensor teacher = random_logits(rng, 1, k, 8.0);
      const std::vector<int> labels = random_labels(rng, 1, k);
      const double alpha = rng.uniform();
      const Distribution teacher_probs = softmax_temperature(teacher, 1.0);
      // Distillation at temperature 1 plus the teacher-entropy constant...
      const double lhs =
          kd_loss(student, teacher, labels, alpha, 1.0).item() + alpha * entropy(teacher_probs);
      // ...equals one cross-entropy against the blended target.
      const Distribution blended = combined_smoothed_target(labels, teacher_probs, alpha);
      const double rhs = cross_entropy(blended, log_softmax(student, 1)).item();
      worst = std::max(worst, std::abs(lhs - rhs));
      ++cases;
    }
  }
  return {"distillation-equals-smoothed-target", worst <= tol,
          "max |kd + alpha H(teacher) - blended CE| = " + fmt(worst) + " over " +
              std::to_string(cases) + " cases (tol " + fmt(tol) + ")"};
}

CheckResult check_uniform_teacher_recovers_smoothing(std::uint64_t seed) {
  NoGradGuard guard;
  Rng rng(split_seed(seed, 103));
  const std::size_t class_counts[] = {2, 5, 10, 100};
  const double tol = 1e-12;
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t k : class_counts) {
    for (int c = 0; c < 100; ++c) {
      const Tensor student = random_logits(rng, 1, k, 8.0);
      const std::vector<int> labels = random_labels(rng, 1, k);
      const double alpha = rng.uniform();
      // Constant logits make the teacher exactly uniform.
      const Tensor teacher = Tensor::filled({1, k}, rng.uniform() * 4.0 - 2.0);
      const double kd = kd_loss(student, teacher, labels, alpha, 1.0).item();
      const double lsr = lsr_loss(student, labels, k, alpha).item();
      worst = std::max(worst, std::abs(kd - lsr));
      ++cases;
    }
  }
  return {"uniform-teacher-recovers-smoothing", worst <= tol,
          "max |kd(uniform teacher) - lsr| = " + fmt(worst) + " over " +
              std::to_string(cases) + " cases (tol " + fmt(tol) + ")"};
}

CheckResult check_temperature_flattens(std::uint64_t seed) {
  NoGradGuard guard;
  Rng rng(split_seed(seed, 104));
  const double taus[] = {1, 5, 10, 20, 50, 100, 1000};
  const double slack = 1e-12;
  const double final_tol = 1e-4;
  bool monotone = true;
  double worst_final = 0.0;
  double worst_rise = 0.0;
  for (int c = 0; c < 100; ++c) {
    const Tensor logits = random_logits(rng, 1, 10, 10.0);
    double prev = 0.0;
    for (std::size_t t = 0; t < std::size(taus); ++t) {
      const double kl = kl_uniform_row(softmax_temperature(logits, taus[t]), 0);
      if (t > 0 && kl > prev + slack) {
        monotone = false;
        worst_rise = std::max(worst_rise, kl - prev);
      }
      prev = kl;
    }
    worst_final = std::max(worst_final, prev);
  }
  const bool passed = monotone && worst_final < final_tol;
  std::string detail = "KL(uniform || softened) nonincreasing over 100 vectors";
  if (!monotone) detail += "; VIOLATION: rose by " + fmt(worst_rise);
  detail += "; max at tau=1000: " + fmt(worst_final) + " (tol " + fmt(final_tol) + ")";
  return {"temperature-flattens-soft-targets", passed, detail};
}

CheckResult check_virtual_teacher_peak(std::uint64_t) {
  NoGradGuard guard;
  const std::size_t k = 10;
  const double as[] = {0.9, 0.99, 1.0};
  const double taus[] = {1, 20, 40};
  std::size_t cases = 0;
  std::size_t misses = 0;
  for (double a : as) {
    for (double tau : taus) {
      std::vector<int> labels(k);
      for (std::size_t i = 0; i < k; ++i) labels[i] = static_cast<int>(i);
      const Distribution softened =
          soften_distribution(virtual_teacher(labels, k, a), tau);
      const std::vector<int> peaks = softened.argmax();
      for (std::size_t i = 0; i < k; ++i) {
        ++cases;
        if (peaks[i] != labels[i]) ++misses;
      }
    }
  }
  return {"virtual-teacher-peak-survives-softening", misses == 0,
          std::to_string(cases - misses) + "/" + std::to_string(cases) +
              " (label, a, tau) combinations keep argmax at the label"};
}

CheckResult check_softened_peak_ratio(std::uint64_t) {
  NoGradGuard guard;
  const std::size_t k = 10;
  const double a = 0.9;
  const double tau = 20.0;
  const Distribution softened = soften_distribution(virtual_teacher(3, k, a), tau);
  double hi = softened.at(0, 0), lo = softened.at(0, 0);
  for (std::size_t c = 1; c < k; ++c) {
    hi = std::max(hi, softened.at(0, c));
    lo = std::min(lo, softened.at(0, c));
  }
  const double measured = hi / lo;
  // Closed form: softening x^(1/tau)-renormalizes, so the two-level ratio
  // a : (1-a)/(K-1) becomes (a (K-1) / (1-a))^(1/tau).
  const double expected =
      std::pow(a * static_cast<double>(k - 1) / (1.0 - a), 1.0 / tau);
  const double rel = std::abs(measured - expected) / expected;
  return {"softened-peak-ratio-closed-form", rel <= 1e-12,
          "measured " + fmt(measured) + " vs closed form " + fmt(expected) +
              ", rel err " + fmt(rel) + " (tol 1e-12)"};
}

struct GradStats {
  double max_rel = 0.0;
  std::size_t n = 0;
  bool ok = true;
};

// An element passes when the difference is negligible in absolute terms or
// small relative to the larger magnitude.
void accumulate(GradStats& stats, double analytic, double numeric, double rel_tol) {
  const double abs_floor = 1e-8;
  const double diff = std::abs(analytic - numeric);
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  ++stats.n;
  if (diff <= abs_floor) return;
  const double rel = diff / denom;
  stats.max_rel = std::max(stats.max_rel, rel);
  if (rel > rel_tol) stats.ok = false;
}

CheckResult grad_detail(const std::string& name, const GradStats& stats, double rel_tol) {
  return {name, stats.ok,
          "max rel err " + fmt(stats.max_rel) + " over " + std::to_string(stats.n) +
              " elements (tol " + fmt(rel_tol) + ")"};
}

CheckResult check_logit_gradients(const std::string& name, const LossSpec& spec,
                                  std::uint64_t seed, bool with_teacher) {
  const double rel_tol = 1e-5;
  Rng rng(split_seed(seed, 105));
  const std::size_t n = 4, k = 6;
  const std::vector<int> labels = random_labels(rng, n, k);
  Tensor teacher;
  if (with_teacher) {
    NoGradGuard guard;
    teacher = random_logits(rng, n, k, 4.0);
  }
  const Tensor* teacher_ptr = with_teacher ? &teacher : nullptr;

  Tensor logits = random_logits(rng, n, k, 4.0, /*requires_grad=*/true);
  Tensor loss = compute_loss(spec, logits, labels, k, teacher_ptr);
  loss.backward();
  const std::span<const double> analytic = logits.grad();

  const Tensor numeric = finite_diff_gradient(
      [&](const Tensor& x) { return compute_loss(spec, x, labels, k, teacher_ptr).item(); },
      logits);

  GradStats stats;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    accumulate(stats, analytic[i], numeric.data()[i], rel_tol);
  }
  return grad_detail(name, stats, rel_tol);
}

CheckResult check_parameter_gradients(const std::string& name, const ModelDescriptor& desc,
                                      const LossSpec& spec, std::uint64_t seed) {
  const double rel_tol = 1e-4;
  Rng rng(split_seed(seed, 106));
  Model model = Model::build(desc, split_seed(seed, 107));
  const std::size_t n = 3;
  const std::size_t k = desc.num_classes;

  Shape batch_shape = desc.input_shape;
  batch_shape.insert(batch_shape.begin(), n);
  std::vector<double> values(numel(batch_shape));
  for (double& v : values) v = rng.normal();
  const Tensor batch = Tensor::from(batch_shape, std::move(values));
  const std::vector<int> labels = random_labels(rng, n, k);

  const auto loss_value = [&]() {
    return compute_loss(spec, model.forward(batch), labels, k).item();
  };

  zero_grad(model.parameters());
  compute_loss(spec, model.forward(batch), labels, k).backward();

  GradStats stats;
  const double h = 1e-5;
  for (Tensor& param : model.parameters()) {
    const std::span<const double> analytic = param.grad();
    std::span<double> data = param.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      double plus, minus;
      {
        NoGradGuard guard;
        data[i] = saved + h;
        plus = loss_value();
        data[i] = saved - h;
        minus = loss_value();
      }
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      accumulate(stats, analytic.empty() ? 0.0 : analytic[i], numeric, rel_tol);
    }
  }
  return grad_detail(name, stats, rel_tol);
}

}  // namespace

std::vector<CheckResult> verify_identities(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(check_smoothing_decomposition(seed));
  results.push_back(check_distillation_equals_smoothed_target(seed));
  results.push_back(check_uniform_teacher_recovers_smoothing(seed));
  results.push_back(check_temperature_flattens(seed));
  results.push_back(check_virtual_teacher_peak(seed));
  results.push_back(check_softened_peak_ratio(seed));
  return results;
}

std::vector<CheckResult> verify_gradients(std::uint64_t seed) {
  std::vector<CheckResult> results;

  LossSpec ce{.kind = LossSpec::Kind::CE};
  LossSpec lsr{.kind = LossSpec::Kind::LSR, .alpha = 0.3};
  LossSpec kd1{.kind = LossSpec::Kind::KD, .alpha = 0.95, .tau = 1.0};
  LossSpec kd20{.kind = LossSpec::Kind::KD, .alpha = 0.95, .tau = 20.0};
  LossSpec kd_scaled{
      .kind = LossSpec::Kind::KD, .alpha = 0.5, .tau = 4.0, .tau_squared_scaling = true};
  LossSpec tf_self{.kind = LossSpec::Kind::TfSelf, .alpha = 0.95, .tau = 20.0};
  LossSpec tf_reg{.kind = LossSpec::Kind::TfReg, .alpha = 0.1, .tau = 20.0, .a = 0.99};
  LossSpec tf_reg_hard{.kind = LossSpec::Kind::TfReg, .alpha = 0.95, .tau = 40.0, .a = 0.9};

  results.push_back(check_logit_gradients("grad-logits-ce", ce, seed + 1, false));
  results.push_back(check_logit_gradients("grad-logits-lsr", lsr, seed + 2, false));
  results.push_back(check_logit_gradients("grad-logits-kd-tau1", kd1, seed + 3, true));
  results.push_back(check_logit_gradients("grad-logits-kd-tau20", kd20, seed + 4, true));
  results.push_back(
      check_logit_gradients("grad-logits-kd-tau4-scaled", kd_scaled, seed + 5, true));
  results.push_back(check_logit_gradients("grad-logits-tf-self", tf_self, seed + 6, true));
  results.push_back(check_logit_gradients("grad-logits-tf-reg", tf_reg, seed + 7, false));
  results.push_back(
      check_logit_gradients("grad-logits-tf-reg-hard", tf_reg_hard, seed + 8, false));

  ModelDescriptor mlp;
  mlp.arch = Arch::MLP;
  mlp.input_shape = {5};
  mlp.hidden_widths = {4};
  mlp.num_classes = 3;
  ModelDescriptor cnn;
  cnn.arch = Arch::PlainCNN;
  cnn.input_shape = {1, 6, 6};
  cnn.conv_channels = {2};
  cnn.fc_widths = {4};
  cnn.num_classes = 3;

  results.push_back(check_parameter_gradients("grad-params-mlp-ce", mlp, ce, seed + 9));
  results.push_back(
      check_parameter_gradients("grad-params-mlp-tf-reg", mlp, tf_reg, seed + 10));
  results.push_back(check_parameter_gradients("grad-params-cnn-ce", cnn, ce, seed + 11));
  results.push_back(
      check_parameter_gradients("grad-params-cnn-lsr", cnn, lsr, seed + 12));
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

std::string report(const std::vector<CheckResult>& results) {
  std::string out;
  for (const CheckResult& r : results) {
    out += r.passed ? "PASS " : "FAIL ";
    out += r.name;
    out += ": ";
    out += r.detail;
    out += "\n";
  }
  return out;
}

}  // namespace distillkit
