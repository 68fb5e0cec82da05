// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillkit/tensor.hpp"

namespace distillkit {

enum class Arch { MLP, PlainCNN };

std::string to_string(Arch arch);
Arch arch_from_string(const std::string& name);

// Fully determines every parameter shape of a model.
//   MLP:      input [D] -> hidden_widths (Linear+ReLU each) -> Linear -> K logits
//   PlainCNN: input [C,H,W] -> per conv_channels entry Conv3x3(pad 1) -> ReLU
//             -> MaxPool2x2, then flatten -> fc_widths (Linear+ReLU each)
//             -> Linear -> K logits
struct ModelDescriptor {
  Arch arch = Arch::MLP;
  Shape input_shape;
  std::vector<std::size_t> hidden_widths;
  std::vector<std::size_t> conv_channels;
  std::vector<std::size_t> fc_widths;
  std::size_t num_classes = 0;

  void validate() const;
  std::size_t input_size() const;
  // Canonical single-line JSON form, stable under roundtrip; embedded in
  // checkpoint files.
  std::string to_text() const;
  static ModelDescriptor from_text(const std::string& text);

  bool operator==(const ModelDescriptor& other) const = default;
};

// Desk-scale student-analogue: [input, 256, K].
ModelDescriptor small_mlp(std::size_t input_size, std::size_t num_classes);
// Desk-scale teacher-analogue with a capacity gap: [input, 1024, 512, K].
ModelDescriptor large_mlp(std::size_t input_size, std::size_t num_classes);
// Three Conv3x3+ReLU+MaxPool stages, one hidden fully-connected layer.
ModelDescriptor plain_cnn_mini(Shape input_chw, std::vector<std::size_t> conv_channels,
                               std::size_t fc_hidden, std::size_t num_classes);

// Cross-correlation with a [Cout,Cin,3,3] kernel, stride 1, zero padding 1;
// spatial size is preserved. Differentiable in input, kernel and bias.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias);
// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
Tensor maxpool2x2(const Tensor& input);
// [N, ...] -> [N, product of remaining extents].
Tensor flatten(const Tensor& input);

class Model {
 public:
  Model() = default;

  // Deterministic initialization: weights ~ Normal(0, sqrt(2/fan_in)) drawn
  // in fixed parameter order from the seed, biases zero. The same
  // (descriptor, seed) yields bit-identical parameters.
  static Model build(const ModelDescriptor& descriptor, std::uint64_t seed);

  bool defined() const { return !params_.empty(); }
  const ModelDescriptor& descriptor() const { return desc_; }

  // batch is [N, ...]: the MLP accepts any layout whose per-sample size
  // matches the descriptor and flattens it; the CNN requires [N,C,H,W]
  // exactly. Returns [N, K] logits, differentiable w.r.t. parameters.
  Tensor forward(const Tensor& batch) const;

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }

  // Deep copy with fresh parameter leaves (used for frozen teachers).
  Model clone() const;

  // Total Model objects ever constructed in this process, counting build,
  // clone and checkpoint loads. Lets tests assert that teacher-free
  // protocols never instantiate a teacher network.
  static std::uint64_t models_built();

 private:
  static Model assemble(ModelDescriptor desc, std::vector<std::string> names,
                        std::vector<Tensor> params);

  ModelDescriptor desc_;
  std::vector<std::string> names_;
  std::vector<Tensor> params_;

  friend Model load_checkpoint(const std::string& path);
};

// Training-run context stored alongside parameters in a checkpoint.
struct CheckpointMeta {
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string loss_kind = "ce";
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Binary checkpoint layout (all integers little-endian):
//   magic "DKITCKPT" | version u32 | descriptor text (u64 length + bytes)
//   | metadata text (u64 length + bytes) | tensor count u64
//   | per tensor: name (u64 length + bytes), rank u64, extents u64 each,
//     float32 payload.
// Parameters are stored at float32, so save -> load -> save is
// byte-identical and reloaded forward outputs match within float32 rounding.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Model& model, const std::string& path, const CheckpointMeta& meta);
Model load_checkpoint(const std::string& path);
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace distillkit
