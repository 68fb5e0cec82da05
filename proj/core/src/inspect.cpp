// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/inspect.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "distillkit/error.hpp"
#include "distillkit/losses.hpp"

namespace distillkit {
namespace {

void check_taus(const std::vector<double>& taus) {
  if (taus.empty()) throw Error("soft-target inspection needs at least one temperature");
  for (double tau : taus) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw Error("temperature must be positive and finite");
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_header(std::ostringstream& out, std::size_t num_classes) {
  out << "sample\tlabel\ttau\targmax\tentropy\tkl_uniform";
  for (std::size_t k = 0; k < num_classes; ++k) out << "\tp" << k;
  out << "\n";
}

// KL(uniform || p) in plain doubles; a zero probability yields +inf, which is
// the honest value for a hard target.
double kl_from_uniform(const Distribution& p, std::size_t row) {
  const std::size_t k = p.num_classes();
  const double u = 1.0 / static_cast<double>(k);
  double kl = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    kl += u * (std::log(u) - std::log(p.at(row, c)));
  }
  return kl;
}

double row_entropy(const Distribution& p, std::size_t row) {
  double h = 0.0;
  for (std::size_t c = 0; c < p.num_classes(); ++c) {
    const double v = p.at(row, c);
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

std::size_t row_argmax(const Distribution& p, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.num_classes(); ++c) {
    if (p.at(row, c) > p.at(row, best)) best = c;
  }
  return best;
}

void write_rows(std::ostringstream& out, const Distribution& base,
                const std::vector<int>& labels, const std::vector<double>& taus) {
  std::vector<Distribution> softened;
  softened.reserve(taus.size());
  for (double tau : taus) softened.push_back(soften_distribution(base, tau));
  for (std::size_t i = 0; i < base.rows(); ++i) {
    for (std::size_t t = 0; t < taus.size(); ++t) {
      const Distribution& p = softened[t];
      out << i << "\t" << labels[i] << "\t" << fmt(taus[t]) << "\t" << row_argmax(p, i)
          << "\t" << fmt(row_entropy(p, i)) << "\t" << fmt(kl_from_uniform(p, i));
      for (std::size_t c = 0; c < p.num_classes(); ++c) {
        out << "\t" << fmt(p.at(i, c));
      }
      out << "\n";
    }
  }
}

}  // namespace

std::vector<double> default_inspect_taus() { return {1, 5, 10, 20, 50, 100}; }

std::string soft_target_table(const Model& teacher, const Dataset& samples,
                              const SoftTargetRequest& request) {
  check_taus(request.taus);
  samples.validate();
  if (teacher.descriptor().num_classes != samples.num_classes) {
    throw Error("teacher expects " + std::to_string(teacher.descriptor().num_classes) +
                " classes but dataset has " + std::to_string(samples.num_classes));
  }
  const std::size_t n = std::min(request.max_samples, samples.size());
  if (n == 0) throw Error("soft-target inspection needs at least one sample");

  NoGradGuard guard;
  Shape batch_shape = samples.sample_shape();
  batch_shape.insert(batch_shape.begin(), n);
  const std::size_t sample_elems = numel(samples.sample_shape());
  std::vector<double> rows(samples.features.data().begin(),
                           samples.features.data().begin() +
                               static_cast<std::ptrdiff_t>(n * sample_elems));
  const Tensor batch = Tensor::from(batch_shape, rows);
  const Tensor logits = teacher.forward(batch);
  const Distribution base = softmax_temperature(logits, 1.0);
  const std::vector<int> labels(samples.labels.begin(),
                                samples.labels.begin() + static_cast<std::ptrdiff_t>(n));

  std::ostringstream out;
  write_header(out, base.num_classes());
  write_rows(out, base, labels, request.taus);
  return out.str();
}

std::string virtual_soft_target_table(const std::vector<int>& labels,
                                      std::size_t num_classes, double a,
                                      const SoftTargetRequest& request) {
  check_taus(request.taus);
  if (labels.empty()) throw Error("soft-target inspection needs at least one label");
  const std::size_t n = std::min(request.max_samples, labels.size());
  const std::vector<int> head(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  const Distribution base = virtual_teacher(head, num_classes, a);

  std::ostringstream out;
  write_header(out, num_classes);
  write_rows(out, base, head, request.taus);
  return out.str();
}

}  // namespace distillkit
