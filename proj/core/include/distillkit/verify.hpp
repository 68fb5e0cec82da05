// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Self-checks for the algebra the losses rely on and for the autodiff
// engine. Each check computes both sides of an identity through independent
// code paths, or compares analytic gradients against central finite
// differences, and reports how close they came.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distillkit {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // measured deviation, case count, tolerance
};

// Distribution identities:
//   - smoothing a label equals mixing cross-entropy with a uniform KL term
//   - a temperature-1 distillation loss equals cross-entropy against the
//     blended hard/soft target, up to the teacher-entropy constant
//   - a uniform teacher reproduces label smoothing exactly
//   - raising temperature drives soft targets monotonically toward uniform
//   - the virtual teacher keeps its peak at the label under any softening
//   - the softened peak ratio matches its closed form
std::vector<CheckResult> verify_identities(std::uint64_t seed);

// Gradient checks: every loss w.r.t. logits (rel tol 1e-5) and every
// architecture's parameters under representative losses (rel tol 1e-4),
// against central finite differences.
std::vector<CheckResult> verify_gradients(std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

// One line per check: "PASS <name>: <detail>".
std::string report(const std::vector<CheckResult>& results);

}  // namespace distillkit
