// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Soft-target inspection: tabulates how a teacher's output distribution
// responds to temperature, row by row, so the softening behaviour can be
// audited before committing to a training run.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillkit/data.hpp"
#include "distillkit/nn.hpp"

namespace distillkit {

// Temperatures swept by default when none are requested.
std::vector<double> default_inspect_taus();

struct SoftTargetRequest {
  std::vector<double> taus = default_inspect_taus();
  std::size_t max_samples = 8;
};

// Tab-separated table with one row per (sample, tau): sample index, label,
// tau, argmax class, entropy (nats), KL(uniform || softened) and the K
// softened probabilities. KL is computed in plain doubles, so a one-hot
// teacher legitimately reports "inf".
std::string soft_target_table(const Model& teacher, const Dataset& samples,
                              const SoftTargetRequest& request);

// Same table for a virtual teacher that puts probability `a` on the label.
std::string virtual_soft_target_table(const std::vector<int>& labels,
                                      std::size_t num_classes, double a,
                                      const SoftTargetRequest& request);

}  // namespace distillkit
