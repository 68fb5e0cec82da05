// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace distillkit {

// Derives an independent child seed from a root seed and a stream index
// (splitmix64-style mixing). All randomness in a run flows from one root
// seed through named streams, so runs are auditable and reproducible.
std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream);

// Deterministic random source. std::mt19937_64 output is fixed by the
// standard, and the uniform/normal mappings are implemented here rather
// than taken from <random> distributions (whose sequences are
// implementation-defined), so streams are bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draws are paired, the spare is cached.
  double normal();

  // Uniform integer in [0, n), unbiased via rejection sampling.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace distillkit
