// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "distillkit/error.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/rng.hpp"
#include "distillkit/tensor.hpp"

using namespace distillkit;
namespace fs = std::filesystem;

namespace {

void check_close(double got, double want, double tol) {
  CAPTURE(got);
  CAPTURE(want);
  CHECK(std::abs(got - want) <= tol);
}

fs::path tmp_dir() {
  fs::path dir = fs::temp_directory_path() / "distillkit_test_nn";
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void fill_params(Model& model, double value) {
  for (Tensor& p : model.parameters()) {
    for (double& v : p.mutable_data()) v = value;
  }
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("building twice from one seed is bit-identical") {
  ModelDescriptor desc = small_mlp(16, 10);
  Model a = Model::build(desc, 123);
  Model b = Model::build(desc, 123);
  Model c = Model::build(desc, 124);
  REQUIRE(a.parameters().size() == b.parameters().size());
  bool all_equal = true;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    auto da = a.parameters()[i].data(), db = b.parameters()[i].data();
    for (std::size_t j = 0; j < da.size(); ++j) all_equal = all_equal && da[j] == db[j];
  }
  CHECK(all_equal);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    auto da = a.parameters()[i].data(), dc = c.parameters()[i].data();
    for (std::size_t j = 0; j < da.size(); ++j) any_diff = any_diff || da[j] != dc[j];
  }
  CHECK(any_diff);
}

TEST_CASE("weight init spread follows the fan-in rule and biases start at zero") {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {1000};
  desc.hidden_widths = {1000};
  desc.num_classes = 10;
  Model model = Model::build(desc, 7);

  REQUIRE(model.parameter_names()[0] == "fc0.weight");
  auto w = model.parameters()[0].data();
  REQUIRE(w.size() == 1000 * 1000);
  double sum = 0.0, sq = 0.0;
  for (double v : w) {
    sum += v;
    sq += v * v;
  }
  double n = static_cast<double>(w.size());
  double mean = sum / n;
  double stddev = std::sqrt(sq / n - mean * mean);
  double want = std::sqrt(2.0 / 1000.0);
  CHECK(std::abs(stddev - want) <= 0.1 * want);
  CHECK(std::abs(mean) <= 3.0 * want / std::sqrt(n));

  REQUIRE(model.parameter_names()[1] == "fc0.bias");
  for (double v : model.parameters()[1].data()) CHECK(v == 0.0);
}

TEST_CASE("a zero-weight model maps everything to zero logits") {
  Model model = Model::build(small_mlp(4, 3), 1);
  fill_params(model, 0.0);
  Tensor out = model.forward(Tensor::from({2, 4}, {1.0, -2.0, 3.0, 0.5, 0.0, 1.0, 2.0, 3.0}));
  REQUIRE(out.shape() == Shape{2, 3});
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("a linear model without hidden layers is matmul plus bias") {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {2};
  desc.hidden_widths = {};
  desc.num_classes = 2;
  Model model = Model::build(desc, 5);
  {
    auto w = model.parameters()[0].mutable_data();
    w[0] = 1.0, w[1] = 2.0, w[2] = 3.0, w[3] = 4.0;
    auto b = model.parameters()[1].mutable_data();
    b[0] = 0.5, b[1] = -0.5;
  }
  Tensor x = Tensor::from({1, 2}, {10.0, 20.0});
  Tensor out = model.forward(x);
  // [10 20] . [[1 2],[3 4]] + [0.5 -0.5]
  CHECK(out.at({0, 0}) == 70.5);
  CHECK(out.at({0, 1}) == 99.5);
}

TEST_CASE("mlp forward flattens image-shaped batches") {
  ModelDescriptor desc;
  desc.arch = Arch::MLP;
  desc.input_shape = {4};
  desc.hidden_widths = {};
  desc.num_classes = 2;
  Model model = Model::build(desc, 5);
  Tensor flat = Tensor::from({1, 4}, {1.0, 2.0, 3.0, 4.0});
  Tensor image = Tensor::from({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor a = model.forward(flat);
  Tensor b = model.forward(image);
  CHECK(a.at({0, 0}) == b.at({0, 0}));
  CHECK(a.at({0, 1}) == b.at({0, 1}));
}

TEST_CASE("conv2d with an identity kernel returns its input") {
  Rng rng(9);
  std::vector<double> img(1 * 1 * 4 * 4);
  for (double& v : img) v = rng.normal();
  Tensor input = Tensor::from({1, 1, 4, 4}, img);
  std::vector<double> k(9, 0.0);
  k[4] = 1.0;  // center tap
  Tensor kernel = Tensor::from({1, 1, 3, 3}, k);
  Tensor bias = Tensor::zeros({1});
  Tensor out = conv2d(input, kernel, bias);
  REQUIRE(out.shape() == input.shape());
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(out.data()[i] == img[i]);
}

TEST_CASE("conv2d of all-ones counts the valid neighborhood") {
  Tensor input = Tensor::filled({1, 1, 4, 4}, 1.0);
  Tensor kernel = Tensor::filled({1, 1, 3, 3}, 1.0);
  Tensor bias = Tensor::zeros({1});
  Tensor out = conv2d(input, kernel, bias);
  std::vector<double> want = {4, 6, 6, 4, 6, 9, 9, 6, 6, 9, 9, 6, 4, 6, 6, 4};
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(out.data()[i] == want[i]);
}

TEST_CASE("conv2d stamps the flipped kernel around a delta input") {
  std::vector<double> img(8 * 8, 0.0);
  img[3 * 8 + 4] = 1.0;
  Tensor input = Tensor::from({1, 1, 8, 8}, img);
  Rng rng(10);
  std::vector<double> k(2 * 1 * 3 * 3);
  for (double& v : k) v = rng.normal();
  Tensor kernel = Tensor::from({2, 1, 3, 3}, k);
  Tensor bias = Tensor::zeros({2});
  Tensor out = conv2d(input, kernel, bias);
  REQUIRE(out.shape() == Shape{1, 2, 8, 8});
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        double want = 0.0;
        if (y >= 2 && y <= 4 && x >= 3 && x <= 5) {
          want = k[(o * 3 + (4 - y)) * 3 + (5 - x)];
        }
        CHECK(out.at({0, o, y, x}) == want);
      }
    }
  }
}

TEST_CASE("conv2d matches a brute-force oracle on random input") {
  Rng rng(11);
  const std::size_t n = 2, cin = 2, cout = 3, h = 5, w = 4;
  std::vector<double> img(n * cin * h * w), k(cout * cin * 3 * 3), b(cout);
  for (double& v : img) v = rng.normal();
  for (double& v : k) v = rng.normal();
  for (double& v : b) v = rng.normal();
  Tensor out = conv2d(Tensor::from({n, cin, h, w}, img), Tensor::from({cout, cin, 3, 3}, k),
                      Tensor::from({cout}, b));
  REQUIRE(out.shape() == Shape{n, cout, h, w});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          double acc = b[o];
          for (std::size_t c = 0; c < cin; ++c) {
            for (int dy = -1; dy <= 1; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                int yy = static_cast<int>(y) + dy, xx = static_cast<int>(x) + dx;
                if (yy < 0 || yy >= static_cast<int>(h) || xx < 0 ||
                    xx >= static_cast<int>(w)) {
                  continue;
                }
                acc += img[((s * cin + c) * h + yy) * w + xx] *
                       k[((o * cin + c) * 3 + (dy + 1)) * 3 + (dx + 1)];
              }
            }
          }
          check_close(out.at({s, o, y, x}), acc, 1e-12);
        }
      }
    }
  }
}

TEST_CASE("conv2d gradients agree with finite differences") {
  Rng rng(12);
  std::vector<double> img(1 * 1 * 3 * 3), k(1 * 1 * 3 * 3), b(1);
  for (double& v : img) v = rng.normal();
  for (double& v : k) v = rng.normal();
  b[0] = rng.normal();
  Tensor input = Tensor::from({1, 1, 3, 3}, img, true);
  Tensor kernel = Tensor::from({1, 1, 3, 3}, k, true);
  Tensor bias = Tensor::from({1}, b, true);
  sum(conv2d(input, kernel, bias)).backward();

  auto loss_wrt_kernel = [&](const Tensor& t) {
    return sum(conv2d(Tensor::from({1, 1, 3, 3}, img), t, Tensor::from({1}, b))).item();
  };
  auto loss_wrt_input = [&](const Tensor& t) {
    return sum(conv2d(t, Tensor::from({1, 1, 3, 3}, k), Tensor::from({1}, b))).item();
  };
  Tensor fd_k = finite_diff_gradient(loss_wrt_kernel, Tensor::from({1, 1, 3, 3}, k));
  Tensor fd_i = finite_diff_gradient(loss_wrt_input, Tensor::from({1, 1, 3, 3}, img));
  for (std::size_t i = 0; i < 9; ++i) {
    check_close(kernel.grad()[i], fd_k.data()[i], 1e-7);
    check_close(input.grad()[i], fd_i.data()[i], 1e-7);
  }
  check_close(bias.grad()[0], 9.0, 1e-12);
}

TEST_CASE("maxpool2x2 takes block maxima and drops odd edges") {
  Tensor input = Tensor::from({1, 1, 4, 4}, {1, 2, 5, 6,    //
                                             3, 4, 7, 8,    //
                                             9, 10, 13, 14,  //
                                             11, 12, 15, 16});
  Tensor out = maxpool2x2(input);
  REQUIRE(out.shape() == Shape{1, 1, 2, 2});
  CHECK(out.at({0, 0, 0, 0}) == 4.0);
  CHECK(out.at({0, 0, 0, 1}) == 8.0);
  CHECK(out.at({0, 0, 1, 0}) == 12.0);
  CHECK(out.at({0, 0, 1, 1}) == 16.0);

  Tensor odd = maxpool2x2(Tensor::filled({1, 1, 5, 5}, 1.0));
  CHECK(odd.shape() == Shape{1, 1, 2, 2});
}

TEST_CASE("maxpool2x2 routes gradient to the first tied maximum") {
  Tensor input = Tensor::from({1, 1, 2, 2}, {3.0, 3.0, 1.0, 3.0}, true);
  sum(maxpool2x2(input)).backward();
  CHECK(input.grad()[0] == 1.0);
  CHECK(input.grad()[1] == 0.0);
  CHECK(input.grad()[2] == 0.0);
  CHECK(input.grad()[3] == 0.0);
}

TEST_CASE("flatten collapses trailing dimensions") {
  Tensor x = Tensor::from({2, 1, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor out = flatten(x);
  REQUIRE(out.shape() == Shape{2, 4});
  CHECK(out.at({1, 0}) == 5.0);
}

TEST_CASE("cnn forward runs end to end with the expected logit shape") {
  ModelDescriptor desc;
  desc.arch = Arch::PlainCNN;
  desc.input_shape = {1, 8, 8};
  desc.conv_channels = {4};
  desc.fc_widths = {8};
  desc.num_classes = 3;
  Model model = Model::build(desc, 3);
  Rng rng(13);
  std::vector<double> img(2 * 1 * 8 * 8);
  for (double& v : img) v = rng.normal();
  Tensor out = model.forward(Tensor::from({2, 1, 8, 8}, img));
  CHECK(out.shape() == Shape{2, 3});
  for (double v : out.data()) CHECK(std::isfinite(v));
}

TEST_CASE("checkpoints roundtrip byte-identically and reload the same function") {
  fs::path dir = tmp_dir();
  ModelDescriptor desc = small_mlp(6, 4);
  Model model = Model::build(desc, 42);
  CheckpointMeta meta{.epoch = 3, .seed = 42, .loss_kind = "lsr", .train_accuracy = 0.5,
                      .test_accuracy = 0.75};
  fs::path first = dir / "first.ckpt";
  fs::path second = dir / "second.ckpt";
  save_checkpoint(model, first.string(), meta);

  Model reloaded = load_checkpoint(first.string());
  CHECK(reloaded.descriptor() == desc);
  save_checkpoint(reloaded, second.string(), read_checkpoint_meta(first.string()));
  CHECK(read_bytes(first) == read_bytes(second));

  CheckpointMeta back = read_checkpoint_meta(first.string());
  CHECK(back.epoch == 3);
  CHECK(back.seed == 42);
  CHECK(back.loss_kind == "lsr");
  CHECK(back.train_accuracy == 0.5);
  CHECK(back.test_accuracy == 0.75);

  Rng rng(14);
  std::vector<double> x(3 * 6);
  for (double& v : x) v = rng.normal();
  Tensor batch = Tensor::from({3, 6}, x);
  Tensor orig = model.forward(batch);
  Tensor again = reloaded.forward(batch);
  double max_diff = 0.0, max_abs = 0.0;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(orig.data()[i] - again.data()[i]));
    max_abs = std::max(max_abs, std::abs(orig.data()[i]));
  }
  CHECK(max_diff <= 1e-6 * std::max(1.0, max_abs));
}

TEST_CASE("cnn checkpoints roundtrip byte-identically") {
  fs::path dir = tmp_dir();
  ModelDescriptor desc = plain_cnn_mini({1, 12, 12}, {4, 8, 8}, 16, 5);
  Model model = Model::build(desc, 77);
  fs::path first = dir / "cnn1.ckpt";
  fs::path second = dir / "cnn2.ckpt";
  save_checkpoint(model, first.string(), CheckpointMeta{});
  save_checkpoint(load_checkpoint(first.string()), second.string(),
                  read_checkpoint_meta(first.string()));
  CHECK(read_bytes(first) == read_bytes(second));
}

TEST_CASE("corrupt checkpoints are rejected with clear errors") {
  fs::path dir = tmp_dir();
  fs::path good = dir / "good.ckpt";
  save_checkpoint(Model::build(small_mlp(4, 3), 9), good.string(), CheckpointMeta{});
  std::string bytes = read_bytes(good);

  fs::path bad_magic = dir / "bad_magic.ckpt";
  std::string corrupted = bytes;
  corrupted[0] = 'X';
  write_bytes(bad_magic, corrupted);
  CHECK_THROWS_WITH_AS((void)load_checkpoint(bad_magic.string()),
                       doctest::Contains("not a checkpoint file (bad magic)"), Error);

  fs::path bad_version = dir / "bad_version.ckpt";
  corrupted = bytes;
  corrupted[8] = 9;  // version u32 directly after the 8-byte magic
  write_bytes(bad_version, corrupted);
  CHECK_THROWS_WITH_AS((void)load_checkpoint(bad_version.string()),
                       doctest::Contains("unsupported checkpoint format version"), Error);

  fs::path truncated = dir / "truncated.ckpt";
  write_bytes(truncated, bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_WITH_AS((void)load_checkpoint(truncated.string()),
                       doctest::Contains("truncated file"), Error);

  fs::path trailing = dir / "trailing.ckpt";
  write_bytes(trailing, bytes + "z");
  CHECK_THROWS_WITH_AS((void)load_checkpoint(trailing.string()),
                       doctest::Contains("trailing bytes"), Error);

  CHECK_THROWS_AS((void)load_checkpoint((dir / "missing.ckpt").string()), Error);
}

TEST_CASE("clone copies parameters into fresh leaves") {
  Model model = Model::build(small_mlp(4, 3), 5);
  Model copy = model.clone();
  copy.parameters()[0].mutable_data()[0] += 1.0;
  CHECK(model.parameters()[0].data()[0] != copy.parameters()[0].data()[0]);
}

TEST_CASE("every construction path counts as a built model") {
  fs::path dir = tmp_dir();
  fs::path path = dir / "count.ckpt";
  std::uint64_t n0 = Model::models_built();
  Model model = Model::build(small_mlp(4, 3), 5);
  CHECK(Model::models_built() == n0 + 1);
  Model copy = model.clone();
  CHECK(Model::models_built() == n0 + 2);
  save_checkpoint(model, path.string(), CheckpointMeta{});
  Model loaded = load_checkpoint(path.string());
  CHECK(Model::models_built() == n0 + 3);
}

TEST_CASE("descriptors roundtrip through their text form") {
  ModelDescriptor mlp = small_mlp(32, 10);
  CHECK(ModelDescriptor::from_text(mlp.to_text()) == mlp);
  ModelDescriptor cnn = plain_cnn_mini({3, 16, 16}, {8, 16, 32}, 64, 10);
  CHECK(ModelDescriptor::from_text(cnn.to_text()) == cnn);
}

TEST_CASE("descriptor validation rejects inconsistent settings") {
  ModelDescriptor bad = small_mlp(8, 10);
  bad.conv_channels = {4};
  CHECK_THROWS_AS(bad.validate(), Error);

  ModelDescriptor tiny = plain_cnn_mini({1, 12, 12}, {4, 4, 4}, 8, 10);
  tiny.input_shape = {1, 2, 2};  // pooled away before the last stage
  CHECK_THROWS_AS(tiny.validate(), Error);

  CHECK_THROWS_AS((void)small_mlp(8, 1), Error);

  CHECK_THROWS_AS((void)plain_cnn_mini({1, 8, 8}, {4, 8}, 16, 10), Error);
}

TEST_CASE("forward validates batch shapes") {
  Model mlp = Model::build(small_mlp(4, 3), 1);
  CHECK_THROWS_AS((void)mlp.forward(Tensor::zeros({2, 5})), Error);
  ModelDescriptor desc = plain_cnn_mini({1, 12, 12}, {2, 2, 2}, 4, 3);
  Model cnn = Model::build(desc, 1);
  CHECK_THROWS_AS((void)cnn.forward(Tensor::zeros({2, 144})), Error);
}

}  // TEST_SUITE
