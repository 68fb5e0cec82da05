// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "distillkit/data.hpp"
#include "distillkit/error.hpp"
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
  fs::path dir = fs::temp_directory_path() / "distillkit_test_data";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void append_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

std::string idx_images(std::uint32_t n, std::uint32_t h, std::uint32_t w,
                       const std::vector<unsigned char>& pixels,
                       std::uint32_t magic = 0x00000803) {
  std::string out;
  append_u32_be(out, magic);
  append_u32_be(out, n);
  append_u32_be(out, h);
  append_u32_be(out, w);
  for (unsigned char p : pixels) out.push_back(static_cast<char>(p));
  return out;
}

std::string idx_labels(const std::vector<unsigned char>& labels,
                       std::uint32_t magic = 0x00000801) {
  std::string out;
  append_u32_be(out, magic);
  append_u32_be(out, static_cast<std::uint32_t>(labels.size()));
  for (unsigned char y : labels) out.push_back(static_cast<char>(y));
  return out;
}

// Two 2x3 images with pixel values covering the u8 range.
const std::vector<unsigned char> kPixels = {0, 255, 128, 7, 9, 11,
                                            64, 32, 16, 200, 100, 50};
const std::vector<unsigned char> kLabels = {0, 1};

struct IdxFixture {
  fs::path images;
  fs::path labels;
};

IdxFixture write_fixture(const std::string& stem) {
  fs::path dir = tmp_dir();
  IdxFixture f{dir / (stem + "-images.idx"), dir / (stem + "-labels.idx")};
  write_file(f.images, idx_images(2, 2, 3, kPixels));
  write_file(f.labels, idx_labels(kLabels));
  return f;
}

Dataset tiny_dataset(std::size_t n) {
  std::vector<double> features(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = static_cast<double>(i);
    labels[i] = static_cast<int>(i % 2);
  }
  Dataset ds;
  ds.features = Tensor::from({n, 1}, std::move(features));
  ds.labels = std::move(labels);
  ds.num_classes = 2;
  ds.split = "train";
  return ds;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("idx files load with scaling and normalization applied") {
  IdxFixture f = write_fixture("load");
  Dataset ds = load_idx(f.images.string(), f.labels.string(), Normalization{0.0, 1.0});
  REQUIRE(ds.features.shape() == Shape{2, 1, 2, 3});
  REQUIRE(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.num_classes == 2);
  check_close(ds.features.at({0, 0, 0, 0}), 0.0, 1e-15);
  check_close(ds.features.at({0, 0, 0, 1}), 1.0, 1e-15);
  check_close(ds.features.at({0, 0, 0, 2}), 128.0 / 255.0, 1e-15);
  check_close(ds.features.at({1, 0, 1, 2}), 50.0 / 255.0, 1e-15);

  Dataset shifted =
      load_idx(f.images.string(), f.labels.string(), Normalization{0.5, 0.25});
  check_close(shifted.features.at({0, 0, 0, 0}), (0.0 - 0.5) / 0.25, 1e-15);
}

TEST_CASE("idx roundtrips byte-exactly through load and write") {
  IdxFixture f = write_fixture("roundtrip");
  fs::path dir = tmp_dir();
  for (Normalization norm : {Normalization{0.0, 1.0}, Normalization{0.1307, 0.3081}}) {
    Dataset ds = load_idx(f.images.string(), f.labels.string(), norm);
    fs::path imgs2 = dir / "rt-images.idx";
    fs::path labs2 = dir / "rt-labels.idx";
    write_idx(ds, imgs2.string(), labs2.string(), norm);
    CHECK(read_file(imgs2) == read_file(f.images));
    CHECK(read_file(labs2) == read_file(f.labels));
  }
}

TEST_CASE("idx rejects wrong magic numbers") {
  fs::path dir = tmp_dir();
  fs::path bad = dir / "bad-magic-images.idx";
  write_file(bad, idx_images(2, 2, 3, kPixels, 0x00000802));
  IdxFixture good = write_fixture("magic");
  CHECK_THROWS_WITH_AS(
      (void)load_idx(bad.string(), good.labels.string(), Normalization{0.0, 1.0}),
      doctest::Contains("wrong magic 0x00000802"), Error);

  fs::path badlab = dir / "bad-magic-labels.idx";
  write_file(badlab, idx_labels(kLabels, 0x00000805));
  CHECK_THROWS_WITH_AS(
      (void)load_idx(good.images.string(), badlab.string(), Normalization{0.0, 1.0}),
      doctest::Contains("expected 0x00000801 (IDX u8 labels)"), Error);
}

TEST_CASE("idx rejects truncated payloads and headers") {
  fs::path dir = tmp_dir();
  IdxFixture good = write_fixture("trunc");
  std::string img_bytes = read_file(good.images);

  fs::path cut_payload = dir / "cut-payload.idx";
  write_file(cut_payload, img_bytes.substr(0, img_bytes.size() - 3));
  CHECK_THROWS_WITH_AS(
      (void)load_idx(cut_payload.string(), good.labels.string(), Normalization{0.0, 1.0}),
      doctest::Contains("truncated file while reading image payload"), Error);

  fs::path cut_header = dir / "cut-header.idx";
  write_file(cut_header, img_bytes.substr(0, 6));
  CHECK_THROWS_WITH_AS(
      (void)load_idx(cut_header.string(), good.labels.string(), Normalization{0.0, 1.0}),
      doctest::Contains("truncated file while reading image count"), Error);
}

TEST_CASE("idx rejects count mismatches and trailing bytes") {
  fs::path dir = tmp_dir();
  IdxFixture good = write_fixture("count");
  fs::path three = dir / "three-labels.idx";
  write_file(three, idx_labels({0, 1, 1}));
  CHECK_THROWS_WITH_AS(
      (void)load_idx(good.images.string(), three.string(), Normalization{0.0, 1.0}),
      doctest::Contains("has 2 images but"), Error);

  fs::path padded = dir / "padded-images.idx";
  write_file(padded, read_file(good.images) + "x");
  CHECK_THROWS_WITH_AS(
      (void)load_idx(padded.string(), good.labels.string(), Normalization{0.0, 1.0}),
      doctest::Contains("trailing bytes after payload"), Error);

  CHECK_THROWS_WITH_AS((void)load_idx((dir / "nope.idx").string(), good.labels.string(),
                                      Normalization{0.0, 1.0}),
                       doctest::Contains("cannot open"), Error);
}

TEST_CASE("write_idx rejects features that do not map back to u8") {
  Dataset ds;
  ds.features = Tensor::from({1, 1, 1, 1}, {2.0});
  ds.labels = {0};
  ds.num_classes = 2;
  ds.split = "train";
  fs::path dir = tmp_dir();
  CHECK_THROWS_AS(write_idx(ds, (dir / "no-images.idx").string(),
                            (dir / "no-labels.idx").string(), Normalization{0.0, 1.0}),
                  Error);
}

TEST_CASE("csv loads labels first, skips headers and tolerates CRLF") {
  fs::path dir = tmp_dir();
  fs::path path = dir / "simple.csv";
  write_file(path, "label,x0,x1\r\n0,1.0,2.0\r\n1,3.0,4.0\r\n");
  Dataset ds = load_csv(path.string(), Normalization{0.0, 1.0});
  REQUIRE(ds.features.shape() == Shape{2, 2});
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.features.at({0, 0}) == 1.0);
  CHECK(ds.features.at({1, 1}) == 4.0);

  fs::path headerless = dir / "headerless.csv";
  write_file(headerless, "0,1.0,2.0\n1,3.0,4.0\n");
  Dataset ds2 = load_csv(headerless.string(), Normalization{0.0, 1.0});
  CHECK(ds2.labels == ds.labels);

  fs::path normed = dir / "normed.csv";
  write_file(normed, "0,10.0\n1,20.0\n");
  Dataset ds3 = load_csv(normed.string(), Normalization{10.0, 5.0});
  CHECK(ds3.features.at({0, 0}) == 0.0);
  CHECK(ds3.features.at({1, 0}) == 2.0);
}

TEST_CASE("csv rejects malformed rows") {
  fs::path dir = tmp_dir();
  fs::path ragged = dir / "ragged.csv";
  write_file(ragged, "0,1.0,2.0\n1,3.0\n");
  CHECK_THROWS_WITH_AS((void)load_csv(ragged.string(), Normalization{0.0, 1.0}),
                       doctest::Contains("expected 3"), Error);

  fs::path bad_label = dir / "bad-label.csv";
  write_file(bad_label, "0.5,1.0\n");
  CHECK_THROWS_WITH_AS((void)load_csv(bad_label.string(), Normalization{0.0, 1.0}),
                       doctest::Contains("invalid label"), Error);

  fs::path bad_value = dir / "bad-value.csv";
  write_file(bad_value, "0,abc\n1,2.0\n");
  CHECK_THROWS_WITH_AS((void)load_csv(bad_value.string(), Normalization{0.0, 1.0}),
                       doctest::Contains("invalid value"), Error);

  fs::path empty = dir / "empty.csv";
  write_file(empty, "label,x0\n");
  CHECK_THROWS_WITH_AS((void)load_csv(empty.string(), Normalization{0.0, 1.0}),
                       doctest::Contains("no data rows"), Error);
}

TEST_CASE("synthetic blobs are deterministic in the seed") {
  auto [train_a, test_a] = synth_blobs(3, 10, 4, 0.5, 11);
  auto [train_b, test_b] = synth_blobs(3, 10, 4, 0.5, 11);
  REQUIRE(train_a.size() == train_b.size());
  bool identical = train_a.labels == train_b.labels;
  auto da = train_a.features.data(), db = train_b.features.data();
  for (std::size_t i = 0; i < da.size(); ++i) identical = identical && da[i] == db[i];
  CHECK(identical);

  auto [train_c, test_c] = synth_blobs(3, 10, 4, 0.5, 12);
  bool any_diff = false;
  auto dc = train_c.features.data();
  for (std::size_t i = 0; i < da.size(); ++i) any_diff = any_diff || da[i] != dc[i];
  CHECK(any_diff);
}

TEST_CASE("synthetic blobs split 80/20 per class") {
  auto [train, test] = synth_blobs(3, 10, 4, 0.5, 11);
  CHECK(train.size() == 3 * 8);
  CHECK(test.size() == 3 * 2);
  CHECK(train.num_classes == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::count(train.labels.begin(), train.labels.end(), k) == 8);
    CHECK(std::count(test.labels.begin(), test.labels.end(), k) == 2);
  }
  CHECK(train.split == "train");
  CHECK(test.split == "test");
  CHECK(train.sample_shape() == Shape{4});
}

TEST_CASE("blob centers sit on the unit sphere") {
  Tensor centers = blob_centers(10, 32, 7);
  REQUIRE(centers.shape() == Shape{10, 32});
  for (std::size_t k = 0; k < 10; ++k) {
    double norm = 0.0;
    for (std::size_t d = 0; d < 32; ++d) norm += centers.at({k, d}) * centers.at({k, d});
    check_close(std::sqrt(norm), 1.0, 1e-12);
  }
}

TEST_CASE("tightly clustered blobs are perfectly separable by their centers") {
  auto [train, test] = synth_blobs(5, 20, 8, 0.01, 3);
  Tensor centers = blob_centers(5, 8, 3);
  CHECK(nearest_center_accuracy(train, centers) == 1.0);
  CHECK(nearest_center_accuracy(test, centers) == 1.0);
}

TEST_CASE("the wide-spread blob fixture matches its recorded center accuracy") {
  auto [train, test] = synth_blobs(10, 1200, 32, 0.9, 7);
  Tensor centers = blob_centers(10, 32, 7);
  check_close(nearest_center_accuracy(train, centers), 0.36770833333333336, 1e-15);
  check_close(nearest_center_accuracy(test, centers), 0.37624999999999997, 1e-15);
}

TEST_CASE("blob generation validates its arguments") {
  CHECK_THROWS_AS((void)synth_blobs(1, 10, 4, 0.5, 1), Error);
  CHECK_THROWS_AS((void)synth_blobs(3, 4, 4, 0.5, 1), Error);
  CHECK_THROWS_AS((void)synth_blobs(3, 10, 0, 0.5, 1), Error);
  CHECK_THROWS_WITH_AS((void)synth_blobs(3, 10, 4, 0.0, 1),
                       doctest::Contains("spread must be positive"), Error);
}

TEST_CASE("batches partition the dataset and keep the short tail") {
  Dataset ds = tiny_dataset(10);
  std::vector<Batch> out = batches(ds, 4, true, 99, 0);
  REQUIRE(out.size() == 3);
  CHECK(out[0].labels.size() == 4);
  CHECK(out[1].labels.size() == 4);
  CHECK(out[2].labels.size() == 2);

  std::vector<double> seen;
  for (const Batch& b : out) {
    for (std::size_t r = 0; r < b.labels.size(); ++r) seen.push_back(b.features.at({r, 0}));
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(seen[i] == static_cast<double>(i));
}

TEST_CASE("shuffling is deterministic per seed and epoch") {
  Dataset ds = tiny_dataset(32);
  std::vector<Batch> a = batches(ds, 8, true, 5, 2);
  std::vector<Batch> b = batches(ds, 8, true, 5, 2);
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t r = 0; r < a[i].labels.size(); ++r) {
      same = same && a[i].features.at({r, 0}) == b[i].features.at({r, 0});
    }
  }
  CHECK(same);

  std::vector<Batch> c = batches(ds, 8, true, 5, 3);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t r = 0; r < a[i].labels.size(); ++r) {
      any_diff = any_diff || a[i].features.at({r, 0}) != c[i].features.at({r, 0});
    }
  }
  CHECK(any_diff);
}

TEST_CASE("unshuffled batches keep the natural order") {
  Dataset ds = tiny_dataset(6);
  std::vector<Batch> out = batches(ds, 4, false, 123, 7);
  REQUIRE(out.size() == 2);
  CHECK(out[0].features.at({0, 0}) == 0.0);
  CHECK(out[0].features.at({3, 0}) == 3.0);
  CHECK(out[1].features.at({1, 0}) == 5.0);

  std::vector<Batch> single = batches(ds, 6, false, 0, 0);
  CHECK(single.size() == 1);

  CHECK_THROWS_WITH_AS((void)batches(ds, 0, false, 0, 0),
                       doctest::Contains("batch_size must be positive"), Error);
}

TEST_CASE("dataset validation catches inconsistencies") {
  Dataset ds = tiny_dataset(4);
  ds.labels.push_back(1);
  CHECK_THROWS_AS(ds.validate(), Error);

  Dataset bad_label = tiny_dataset(4);
  bad_label.labels[2] = 7;  // outside num_classes
  CHECK_THROWS_AS(bad_label.validate(), Error);

  Dataset ok = tiny_dataset(4);
  CHECK_NOTHROW(ok.validate());
}

}  // TEST_SUITE
