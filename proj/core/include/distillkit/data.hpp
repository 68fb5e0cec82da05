// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "distillkit/tensor.hpp"

namespace distillkit {

// Affine standardization applied after scaling raw pixels to [0,1]:
// value = (pixel/255 - mean) / stddev. Statistics come from the experiment
// config, not from the dataset file.
struct Normalization {
  double mean = 0.0;
  double stddev = 1.0;

  void validate() const;
};

// Immutable sample collection. features is [N,D] or [N,C,H,W] and carries no
// gradient; labels are class indices in [0, num_classes).
struct Dataset {
  Tensor features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::string split;

  std::size_t size() const { return labels.size(); }
  // Per-sample feature shape (feature tensor shape minus the batch axis).
  Shape sample_shape() const;
  void validate() const;
};

// Reads an IDX image/label pair (images magic 0x00000803 over [N,H,W] u8
// pixels, labels magic 0x00000801 over N u8 labels; all header words
// big-endian). Pixels are scaled to [0,1] and standardized by norm; features
// come out as [N,1,H,W]. num_classes = 0 infers max(label)+1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const Normalization& norm, std::size_t num_classes = 0);

// Inverse of load_idx: un-standardizes features back to u8 pixels and writes
// the same byte layout, so write_idx(load_idx(f)) reproduces f exactly.
void write_idx(const Dataset& dataset, const std::string& images_path,
               const std::string& labels_path, const Normalization& norm);

// Rows of "label,feature,feature,...". A header row is skipped when the
// first field is not numeric. Features are standardized as (value - mean) /
// stddev (no 1/255 scaling; CSV values are taken as-is).
Dataset load_csv(const std::string& path, const Normalization& norm,
                 std::size_t num_classes = 0);

// Gaussian class blobs: K centers drawn on the unit sphere in `dim`
// dimensions, n_per_class samples per class ~ Normal(center, spread^2 I),
// split 80/20 into train/test per class. Same seed, same datasets.
std::pair<Dataset, Dataset> synth_blobs(std::size_t num_classes, std::size_t n_per_class,
                                        std::size_t dim, double spread, std::uint64_t seed);

// Fraction of samples whose nearest class center is their own: an upper
// estimate of achievable accuracy used to calibrate blob difficulty.
double nearest_center_accuracy(const Dataset& dataset, const Tensor& centers);
// The centers synth_blobs drew for this seed, shape [K, dim].
Tensor blob_centers(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

struct Batch {
  Tensor features;
  std::vector<int> labels;
};

// Splits the dataset into batches of batch_size (last batch may be short).
// With shuffle, the visit order is a Fisher-Yates permutation derived only
// from (seed, epoch); without, natural order. Every index appears exactly
// once either way.
std::vector<Batch> batches(const Dataset& dataset, std::size_t batch_size, bool shuffle,
                           std::uint64_t seed, int epoch);

}  // namespace distillkit
