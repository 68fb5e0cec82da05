// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/nn.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "bytes.hpp"
#include "distillkit/error.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {
namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[8] = {'D', 'K', 'I', 'T', 'C', 'K', 'P', 'T'};
constexpr std::size_t kMaxTextBytes = std::size_t{10} << 20;
constexpr std::size_t kMaxTensorElems = std::size_t{1} << 30;

std::atomic<std::uint64_t> g_models_built{0};

void check_positive(const std::vector<std::size_t>& widths, const char* what) {
  for (std::size_t w : widths) {
    if (w == 0) throw Error(std::string(what) + " must be positive");
  }
}

// The full list of (name, shape) pairs a descriptor defines, in forward
// order. build() draws parameters in this order; load_checkpoint() validates
// file contents against it.
std::vector<std::pair<std::string, Shape>> parameter_template(const ModelDescriptor& desc) {
  std::vector<std::pair<std::string, Shape>> out;
  auto add_linear = [&out](std::size_t index, std::size_t in, std::size_t width) {
    out.emplace_back("fc" + std::to_string(index) + ".weight", Shape{in, width});
    out.emplace_back("fc" + std::to_string(index) + ".bias", Shape{width});
  };
  if (desc.arch == Arch::MLP) {
    std::size_t in = desc.input_size();
    std::size_t index = 0;
    for (std::size_t width : desc.hidden_widths) {
      add_linear(index++, in, width);
      in = width;
    }
    add_linear(index, in, desc.num_classes);
    return out;
  }
  std::size_t in_ch = desc.input_shape[0];
  std::size_t h = desc.input_shape[1];
  std::size_t w = desc.input_shape[2];
  for (std::size_t i = 0; i < desc.conv_channels.size(); ++i) {
    const std::size_t out_ch = desc.conv_channels[i];
    out.emplace_back("conv" + std::to_string(i) + ".weight", Shape{out_ch, in_ch, 3, 3});
    out.emplace_back("conv" + std::to_string(i) + ".bias", Shape{out_ch});
    in_ch = out_ch;
    h /= 2;
    w /= 2;
  }
  std::size_t in = in_ch * h * w;
  std::size_t index = 0;
  for (std::size_t width : desc.fc_widths) {
    add_linear(index++, in, width);
    in = width;
  }
  add_linear(index, in, desc.num_classes);
  return out;
}

std::size_t fan_in_of(const Shape& shape) {
  if (shape.size() == 2) return shape[0];
  if (shape.size() == 4) return shape[1] * shape[2] * shape[3];
  throw Error("no fan-in rule for parameter shape " + shape_str(shape));
}

}  // namespace

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::MLP: return "mlp";
    case Arch::PlainCNN: return "plain-cnn";
  }
  throw Error("unknown architecture");
}

Arch arch_from_string(const std::string& name) {
  if (name == "mlp") return Arch::MLP;
  if (name == "plain-cnn") return Arch::PlainCNN;
  throw Error("unknown architecture '" + name + "', expected mlp or plain-cnn");
}

void ModelDescriptor::validate() const {
  if (num_classes < 2) {
    throw Error("descriptor needs at least 2 classes, got " + std::to_string(num_classes));
  }
  if (input_shape.empty()) throw Error("descriptor input_shape is empty");
  for (std::size_t d : input_shape) {
    if (d == 0) throw Error("descriptor input_shape extents must be positive");
  }
  if (arch == Arch::MLP) {
    check_positive(hidden_widths, "MLP hidden widths");
    if (!conv_channels.empty() || !fc_widths.empty()) {
      throw Error("MLP descriptor must not set conv_channels or fc_widths");
    }
    return;
  }
  if (input_shape.size() != 3) {
    throw Error("PlainCNN input_shape must be [channels, height, width], got " +
                shape_str(input_shape));
  }
  if (conv_channels.empty()) throw Error("PlainCNN needs at least one conv stage");
  check_positive(conv_channels, "conv channel counts");
  check_positive(fc_widths, "fully-connected widths");
  if (!hidden_widths.empty()) {
    throw Error("PlainCNN descriptor must use fc_widths, not hidden_widths");
  }
  std::size_t h = input_shape[1];
  std::size_t w = input_shape[2];
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    if (h < 3 || w < 3) {
      throw Error("conv stage " + std::to_string(i) + " needs spatial dims >= 3, has " +
                  std::to_string(h) + "x" + std::to_string(w));
    }
    h /= 2;
    w /= 2;
  }
}

std::size_t ModelDescriptor::input_size() const {
  return numel(input_shape);
}

std::string ModelDescriptor::to_text() const {
  json j;
  j["arch"] = to_string(arch);
  j["input_shape"] = input_shape;
  j["num_classes"] = num_classes;
  if (arch == Arch::MLP) {
    j["hidden_widths"] = hidden_widths;
  } else {
    j["conv_channels"] = conv_channels;
    j["fc_widths"] = fc_widths;
  }
  return j.dump();
}

ModelDescriptor ModelDescriptor::from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid descriptor text: ") + e.what());
  }
  ModelDescriptor desc;
  try {
    desc.arch = arch_from_string(j.at("arch").get<std::string>());
    desc.input_shape = j.at("input_shape").get<Shape>();
    desc.num_classes = j.at("num_classes").get<std::size_t>();
    if (desc.arch == Arch::MLP) {
      desc.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
    } else {
      desc.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
      desc.fc_widths = j.at("fc_widths").get<std::vector<std::size_t>>();
    }
  } catch (const json::exception& e) {
    throw Error(std::string("invalid descriptor text: ") + e.what());
  }
  desc.validate();
  return desc;
}

ModelDescriptor small_mlp(std::size_t input_size, std::size_t num_classes) {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {input_size};
  desc.hidden_widths = {256};
  desc.num_classes = num_classes;
  desc.validate();
  return desc;
}

ModelDescriptor large_mlp(std::size_t input_size, std::size_t num_classes) {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {input_size};
  desc.hidden_widths = {1024, 512};
  desc.num_classes = num_classes;
  desc.validate();
  return desc;
}

ModelDescriptor plain_cnn_mini(Shape input_chw, std::vector<std::size_t> conv_channels,
                               std::size_t fc_hidden, std::size_t num_classes) {
  if (conv_channels.size() != 3) {
    throw Error("plain_cnn_mini takes exactly 3 conv channel counts, got " +
                std::to_string(conv_channels.size()));
  }
  ModelDescriptor desc;
  desc.arch = Arch::PlainCNN;
  desc.input_shape = std::move(input_chw);
  desc.conv_channels = std::move(conv_channels);
  desc.fc_widths = {fc_hidden};
  desc.num_classes = num_classes;
  desc.validate();
  return desc;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  if (!input.defined() || !kernel.defined() || !bias.defined()) {
    throw Error("conv2d with undefined tensor");
  }
  if (input.rank() != 4) {
    throw Error("conv2d input must be [N,C,H,W], got " + shape_str(input.shape()));
  }
  if (kernel.rank() != 4 || kernel.shape()[2] != 3 || kernel.shape()[3] != 3) {
    throw Error("conv2d kernel must be [Cout,Cin,3,3], got " + shape_str(kernel.shape()));
  }
  const std::size_t n = input.shape()[0];
  const std::size_t cin = input.shape()[1];
  const std::size_t h = input.shape()[2];
  const std::size_t w = input.shape()[3];
  const std::size_t cout = kernel.shape()[0];
  if (kernel.shape()[1] != cin) {
    throw Error("conv2d kernel expects " + std::to_string(kernel.shape()[1]) +
                " input channels, batch has " + std::to_string(cin));
  }
  if (bias.shape() != Shape{cout}) {
    throw Error("conv2d bias must be [Cout], got " + shape_str(bias.shape()));
  }
  if (h < 3 || w < 3) {
    throw Error("conv2d needs spatial dims >= 3, got " + std::to_string(h) + "x" +
                std::to_string(w));
  }

  std::span<const double> x = input.data();
  std::span<const double> k = kernel.data();
  std::span<const double> b = bias.data();
  std::vector<double> out(n * cout * h * w);
  const auto in_at = [&](std::size_t ni, std::size_t ci, std::ptrdiff_t y,
                         std::ptrdiff_t xx) -> double {
    if (y < 0 || xx < 0 || y >= static_cast<std::ptrdiff_t>(h) ||
        xx >= static_cast<std::ptrdiff_t>(w)) {
      return 0.0;
    }
    return x[((ni * cin + ci) * h + static_cast<std::size_t>(y)) * w +
             static_cast<std::size_t>(xx)];
  };
  for (std::size_t ni = 0; ni < n; ++ni) {
    for (std::size_t co = 0; co < cout; ++co) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          double acc = b[co];
          for (std::size_t ci = 0; ci < cin; ++ci) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
              for (std::size_t kx = 0; kx < 3; ++kx) {
                acc += k[((co * cin + ci) * 3 + ky) * 3 + kx] *
                       in_at(ni, ci,
                             static_cast<std::ptrdiff_t>(y + ky) - 1,
                             static_cast<std::ptrdiff_t>(xx + kx) - 1);
              }
            }
          }
          out[((ni * cout + co) * h + y) * w + xx] = acc;
        }
      }
    }
  }

  return make_op(
      "conv2d", {n, cout, h, w}, std::move(out), {input, kernel, bias},
      [input, kernel, n, cin, h, w, cout](const detail::TensorNode& self,
                                          const std::vector<std::span<double>>& grad_in) {
        std::span<const double> x = input.data();
        std::span<const double> k = kernel.data();
        std::span<double> dx = grad_in[0];
        std::span<double> dk = grad_in[1];
        std::span<double> db = grad_in[2];
        for (std::size_t ni = 0; ni < n; ++ni) {
          for (std::size_t co = 0; co < cout; ++co) {
            for (std::size_t y = 0; y < h; ++y) {
              for (std::size_t xx = 0; xx < w; ++xx) {
                const double g = self.grad[((ni * cout + co) * h + y) * w + xx];
                if (!db.empty()) db[co] += g;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                  for (std::size_t ky = 0; ky < 3; ++ky) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t kx = 0; kx < 3; ++kx) {
                      const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(xx + kx) - 1;
                      if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                      const std::size_t in_idx =
                          ((ni * cin + ci) * h + static_cast<std::size_t>(iy)) * w +
                          static_cast<std::size_t>(ix);
                      const std::size_t k_idx = ((co * cin + ci) * 3 + ky) * 3 + kx;
                      if (!dx.empty()) dx[in_idx] += g * k[k_idx];
                      if (!dk.empty()) dk[k_idx] += g * x[in_idx];
                    }
                  }
                }
              }
            }
          }
        }
      });
}

Tensor maxpool2x2(const Tensor& input) {
  if (!input.defined()) throw Error("maxpool2x2 of undefined tensor");
  if (input.rank() != 4) {
    throw Error("maxpool2x2 input must be [N,C,H,W], got " + shape_str(input.shape()));
  }
  const std::size_t n = input.shape()[0];
  const std::size_t c = input.shape()[1];
  const std::size_t h = input.shape()[2];
  const std::size_t w = input.shape()[3];
  if (h < 2 || w < 2) {
    throw Error("maxpool2x2 needs spatial dims >= 2, got " + std::to_string(h) + "x" +
                std::to_string(w));
  }
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  std::span<const double> x = input.data();
  std::vector<double> out(n * c * oh * ow);
  // Flat input index of each pooled maximum; ties go to the first element in
  // scan order, matching the backward routing.
  std::vector<std::size_t> arg(out.size());
  for (std::size_t ni = 0; ni < n; ++ni) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const std::size_t base = (ni * c + ci) * h;
          std::size_t best = (base + 2 * y) * w + 2 * xx;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t idx = (base + 2 * y + dy) * w + 2 * xx + dx;
              if (x[idx] > x[best]) best = idx;
            }
          }
          const std::size_t out_idx = ((ni * c + ci) * oh + y) * ow + xx;
          out[out_idx] = x[best];
          arg[out_idx] = best;
        }
      }
    }
  }
  return make_op(
      "maxpool2x2", {n, c, oh, ow}, std::move(out), {input},
      [arg = std::move(arg)](const detail::TensorNode& self,
                             const std::vector<std::span<double>>& grad_in) {
        if (grad_in[0].empty()) return;
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          grad_in[0][arg[i]] += self.grad[i];
        }
      });
}

Tensor flatten(const Tensor& input) {
  if (!input.defined()) throw Error("flatten of undefined tensor");
  if (input.rank() < 2) {
    throw Error("flatten expects a batch of rank >= 2, got " + shape_str(input.shape()));
  }
  const std::size_t n = input.shape()[0];
  return reshape(input, {n, input.size() / n});
}

Model Model::assemble(ModelDescriptor desc, std::vector<std::string> names,
                      std::vector<Tensor> params) {
  Model m;
  m.desc_ = std::move(desc);
  m.names_ = std::move(names);
  m.params_ = std::move(params);
  g_models_built.fetch_add(1, std::memory_order_relaxed);
  return m;
}

Model Model::build(const ModelDescriptor& descriptor, std::uint64_t seed) {
  descriptor.validate();
  Rng rng(seed);
  std::vector<std::string> names;
  std::vector<Tensor> params;
  for (auto& [name, shape] : parameter_template(descriptor)) {
    std::vector<double> values(numel(shape), 0.0);
    if (name.ends_with(".weight")) {
      const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in_of(shape)));
      for (double& v : values) v = stddev * rng.normal();
    }
    names.push_back(name);
    params.push_back(Tensor::from(shape, std::move(values), /*requires_grad=*/true));
  }
  return assemble(descriptor, std::move(names), std::move(params));
}

Tensor Model::forward(const Tensor& batch) const {
  if (!defined()) throw Error("forward on an unbuilt model");
  if (!batch.defined() || batch.rank() < 2) {
    throw Error("forward expects a batch of rank >= 2");
  }
  const std::size_t n = batch.shape()[0];
  const std::size_t sample_size = batch.size() / n;

  std::size_t p = 0;
  auto linear = [&](const Tensor& x) {
    const Tensor& weight = params_[p];
    const Tensor& bias = params_[p + 1];
    p += 2;
    return add(matmul(x, weight), broadcast_to(bias, {x.shape()[0], bias.shape()[0]}));
  };

  Tensor x;
  std::size_t fc_layers = 0;
  if (desc_.arch == Arch::MLP) {
    if (sample_size != desc_.input_size()) {
      throw Error("model expects " + std::to_string(desc_.input_size()) +
                  " features per sample, batch has " + std::to_string(sample_size));
    }
    x = batch.rank() == 2 ? batch : flatten(batch);
    fc_layers = desc_.hidden_widths.size() + 1;
  } else {
    Shape expect = {n, desc_.input_shape[0], desc_.input_shape[1], desc_.input_shape[2]};
    if (batch.shape() != expect) {
      throw Error("model expects batch shape " + shape_str(expect) + ", got " +
                  shape_str(batch.shape()));
    }
    x = batch;
    for (std::size_t i = 0; i < desc_.conv_channels.size(); ++i) {
      const Tensor& kernel = params_[p];
      const Tensor& bias = params_[p + 1];
      p += 2;
      x = maxpool2x2(relu(conv2d(x, kernel, bias)));
    }
    x = flatten(x);
    fc_layers = desc_.fc_widths.size() + 1;
  }
  for (std::size_t i = 0; i < fc_layers; ++i) {
    x = linear(x);
    if (i + 1 < fc_layers) x = relu(x);
  }
  return x;
}

Model Model::clone() const {
  if (!defined()) throw Error("clone of an unbuilt model");
  std::vector<Tensor> params;
  params.reserve(params_.size());
  for (const Tensor& t : params_) {
    std::span<const double> d = t.data();
    params.push_back(Tensor::from(t.shape(), std::vector<double>(d.begin(), d.end()),
                                  /*requires_grad=*/true));
  }
  return assemble(desc_, names_, std::move(params));
}

std::uint64_t Model::models_built() {
  return g_models_built.load(std::memory_order_relaxed);
}

namespace {

json meta_to_json(const CheckpointMeta& meta) {
  json j;
  j["epoch"] = meta.epoch;
  j["loss_kind"] = meta.loss_kind;
  j["seed"] = meta.seed;
  j["test_accuracy"] = meta.test_accuracy;
  j["train_accuracy"] = meta.train_accuracy;
  return j;
}

CheckpointMeta meta_from_json(const std::string& text) {
  CheckpointMeta meta;
  try {
    json j = json::parse(text);
    meta.epoch = j.at("epoch").get<int>();
    meta.loss_kind = j.at("loss_kind").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.test_accuracy = j.at("test_accuracy").get<double>();
    meta.train_accuracy = j.at("train_accuracy").get<double>();
  } catch (const json::exception& e) {
    throw Error(std::string("invalid checkpoint metadata: ") + e.what());
  }
  return meta;
}

void write_text_block(std::ostream& out, const std::string& text) {
  detail::write_u64_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_block(std::istream& in, const char* what) {
  const std::uint64_t len = detail::read_u64_le(in, what);
  if (len > kMaxTextBytes) {
    throw Error(std::string("corrupt checkpoint: unreasonable ") + what + " length");
  }
  std::string text(len, '\0');
  detail::read_exact(in, text.data(), text.size(), what);
  return text;
}

struct CheckpointHeader {
  ModelDescriptor descriptor;
  CheckpointMeta meta;
};

CheckpointHeader read_header(std::istream& in, const std::string& path) {
  char magic[8];
  detail::read_exact(in, magic, 8, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw Error("'" + path + "' is not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = detail::read_u32_le(in, "format version");
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint format version " + std::to_string(version) +
                ", expected " + std::to_string(kCheckpointVersion));
  }
  CheckpointHeader header;
  header.descriptor = ModelDescriptor::from_text(read_text_block(in, "descriptor"));
  header.meta = meta_from_json(read_text_block(in, "metadata"));
  return header;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path,
                     const CheckpointMeta& meta) {
  if (!model.defined()) throw Error("save_checkpoint of an unbuilt model");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(kCheckpointMagic, 8);
  detail::write_u32_le(out, kCheckpointVersion);
  write_text_block(out, model.descriptor().to_text());
  write_text_block(out, meta_to_json(meta).dump());
  const auto& params = model.parameters();
  const auto& names = model.parameter_names();
  detail::write_u64_le(out, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    write_text_block(out, names[i]);
    detail::write_u64_le(out, params[i].rank());
    for (std::size_t d : params[i].shape()) detail::write_u64_le(out, d);
    for (double v : params[i].data()) {
      detail::write_f32_le(out, static_cast<float>(v));
    }
  }
  out.flush();
  if (!out.good()) throw Error("write to '" + path + "' failed");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint file '" + path + "'");
  CheckpointHeader header = read_header(in, path);

  const auto expected = parameter_template(header.descriptor);
  const std::uint64_t count = detail::read_u64_le(in, "tensor count");
  if (count != expected.size()) {
    throw Error("checkpoint holds " + std::to_string(count) + " tensors, descriptor requires " +
                std::to_string(expected.size()));
  }
  std::vector<std::string> names;
  std::vector<Tensor> params;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = read_text_block(in, "tensor name");
    if (name != expected[i].first) {
      throw Error("checkpoint tensor '" + name + "' at position " + std::to_string(i) +
                  ", descriptor requires '" + expected[i].first + "'");
    }
    const std::uint64_t rank = detail::read_u64_le(in, "tensor rank");
    if (rank > 8) throw Error("corrupt checkpoint: tensor rank " + std::to_string(rank));
    Shape shape(rank);
    std::size_t count_elems = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape[d] = detail::read_u64_le(in, "tensor extent");
      if (shape[d] == 0 || count_elems > kMaxTensorElems / std::max<std::size_t>(shape[d], 1)) {
        throw Error("corrupt checkpoint: tensor extents " + shape_str(shape));
      }
      count_elems *= shape[d];
    }
    if (shape != expected[i].second) {
      throw Error("checkpoint tensor '" + name + "' has shape " + shape_str(shape) +
                  ", descriptor requires " + shape_str(expected[i].second));
    }
    std::vector<double> values(count_elems);
    for (double& v : values) {
      v = static_cast<double>(detail::read_f32_le(in, "tensor payload"));
    }
    names.push_back(name);
    params.push_back(Tensor::from(std::move(shape), std::move(values),
                                  /*requires_grad=*/true));
  }
  char extra;
  if (in.read(&extra, 1).gcount() != 0) {
    throw Error("trailing bytes after checkpoint payload in '" + path + "'");
  }
  return Model::assemble(std::move(header.descriptor), std::move(names), std::move(params));
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint file '" + path + "'");
  return read_header(in, path).meta;
}

}  // namespace distillkit
