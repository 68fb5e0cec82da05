// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bytes.hpp"
#include "distillkit/error.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::string hex_u32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

void expect_eof(std::istream& in, const std::string& path) {
  char extra;
  if (in.read(&extra, 1).gcount() != 0) {
    throw Error("trailing bytes after payload in '" + path + "'");
  }
}

std::size_t infer_num_classes(const std::vector<int>& labels, std::size_t requested) {
  if (requested != 0) return requested;
  int max_label = 0;
  for (int y : labels) max_label = std::max(max_label, y);
  return static_cast<std::size_t>(max_label) + 1;
}

// Unit-sphere class centers, one Rng stream so centers depend only on
// (num_classes, dim, seed).
std::vector<double> make_centers(std::size_t num_classes, std::size_t dim,
                                 std::uint64_t seed) {
  Rng rng(split_seed(seed, 0));
  std::vector<double> centers(num_classes * dim);
  for (std::size_t k = 0; k < num_classes; ++k) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = rng.normal();
        centers[k * dim + d] = v;
        norm_sq += v * v;
      }
    } while (norm_sq == 0.0);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t d = 0; d < dim; ++d) centers[k * dim + d] *= inv;
  }
  return centers;
}

}  // namespace

void Normalization::validate() const {
  if (!std::isfinite(mean)) throw Error("normalization mean must be finite");
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw Error("normalization stddev must be positive, got " + std::to_string(stddev));
  }
}

Shape Dataset::sample_shape() const {
  if (!features.defined() || features.rank() < 2) {
    throw Error("dataset features must be [N, ...]");
  }
  return Shape(features.shape().begin() + 1, features.shape().end());
}

void Dataset::validate() const {
  if (labels.empty()) throw Error("dataset is empty");
  if (!features.defined() || features.rank() < 2) {
    throw Error("dataset features must be [N, ...]");
  }
  if (features.shape()[0] != labels.size()) {
    throw Error("dataset has " + std::to_string(features.shape()[0]) + " feature rows but " +
                std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 2) {
    throw Error("dataset needs at least 2 classes, got " + std::to_string(num_classes));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw Error("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                  " out of range for " + std::to_string(num_classes) + " classes");
    }
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw Error("dataset features contain non-finite values");
  }
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const Normalization& norm, std::size_t num_classes) {
  norm.validate();
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw Error("cannot open IDX image file '" + images_path + "'");
  const std::uint32_t images_magic = detail::read_u32_be(imgs, "image magic");
  if (images_magic != kIdxImagesMagic) {
    throw Error("'" + images_path + "' has wrong magic " + hex_u32(images_magic) +
                ", expected " + hex_u32(kIdxImagesMagic) + " (IDX u8 images)");
  }
  const std::uint32_t n = detail::read_u32_be(imgs, "image count");
  const std::uint32_t h = detail::read_u32_be(imgs, "image rows");
  const std::uint32_t w = detail::read_u32_be(imgs, "image columns");
  if (n == 0 || h == 0 || w == 0) {
    throw Error("'" + images_path + "' declares an empty image grid");
  }
  std::vector<char> pixels(static_cast<std::size_t>(n) * h * w);
  detail::read_exact(imgs, pixels.data(), pixels.size(), "image payload");
  expect_eof(imgs, images_path);

  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw Error("cannot open IDX label file '" + labels_path + "'");
  const std::uint32_t labels_magic = detail::read_u32_be(labs, "label magic");
  if (labels_magic != kIdxLabelsMagic) {
    throw Error("'" + labels_path + "' has wrong magic " + hex_u32(labels_magic) +
                ", expected " + hex_u32(kIdxLabelsMagic) + " (IDX u8 labels)");
  }
  const std::uint32_t label_count = detail::read_u32_be(labs, "label count");
  if (label_count != n) {
    throw Error("'" + images_path + "' has " + std::to_string(n) + " images but '" +
                labels_path + "' has " + std::to_string(label_count) + " labels");
  }
  std::vector<char> raw_labels(label_count);
  detail::read_exact(labs, raw_labels.data(), raw_labels.size(), "label payload");
  expect_eof(labs, labels_path);

  std::vector<double> features(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double scaled = static_cast<double>(static_cast<unsigned char>(pixels[i])) / 255.0;
    features[i] = (scaled - norm.mean) / norm.stddev;
  }
  std::vector<int> labels(label_count);
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    labels[i] = static_cast<unsigned char>(raw_labels[i]);
  }

  Dataset ds;
  ds.features = Tensor::from({n, 1, h, w}, std::move(features));
  ds.labels = std::move(labels);
  ds.num_classes = infer_num_classes(ds.labels, num_classes);
  ds.validate();
  return ds;
}

void write_idx(const Dataset& dataset, const std::string& images_path,
               const std::string& labels_path, const Normalization& norm) {
  norm.validate();
  dataset.validate();
  if (dataset.features.rank() != 4 || dataset.features.shape()[1] != 1) {
    throw Error("write_idx needs [N,1,H,W] features, got " +
                shape_str(dataset.features.shape()));
  }
  const std::size_t n = dataset.features.shape()[0];
  const std::size_t h = dataset.features.shape()[2];
  const std::size_t w = dataset.features.shape()[3];

  std::ofstream imgs(images_path, std::ios::binary | std::ios::trunc);
  if (!imgs) throw Error("cannot open '" + images_path + "' for writing");
  detail::write_u32_be(imgs, kIdxImagesMagic);
  detail::write_u32_be(imgs, static_cast<std::uint32_t>(n));
  detail::write_u32_be(imgs, static_cast<std::uint32_t>(h));
  detail::write_u32_be(imgs, static_cast<std::uint32_t>(w));
  for (double v : dataset.features.data()) {
    const long pixel = std::lround((v * norm.stddev + norm.mean) * 255.0);
    if (pixel < 0 || pixel > 255) {
      throw Error("feature value " + std::to_string(v) +
                  " does not un-standardize to a u8 pixel");
    }
    const char byte = static_cast<char>(static_cast<unsigned char>(pixel));
    imgs.write(&byte, 1);
  }
  imgs.flush();
  if (!imgs.good()) throw Error("write to '" + images_path + "' failed");

  std::ofstream labs(labels_path, std::ios::binary | std::ios::trunc);
  if (!labs) throw Error("cannot open '" + labels_path + "' for writing");
  detail::write_u32_be(labs, kIdxLabelsMagic);
  detail::write_u32_be(labs, static_cast<std::uint32_t>(n));
  for (int y : dataset.labels) {
    if (y < 0 || y > 255) throw Error("label " + std::to_string(y) + " does not fit in u8");
    const char byte = static_cast<char>(static_cast<unsigned char>(y));
    labs.write(&byte, 1);
  }
  labs.flush();
  if (!labs.good()) throw Error("write to '" + labels_path + "' failed");
}

Dataset load_csv(const std::string& path, const Normalization& norm,
                 std::size_t num_classes) {
  norm.validate();
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV file '" + path + "'");

  auto parse_double = [](const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0' && std::isfinite(out);
  };

  std::vector<double> features;
  std::vector<int> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");

    double first_value = 0.0;
    if (first_data_row && !parse_double(fields[0], first_value)) {
      continue;  // header row
    }
    if (fields.size() < 2) {
      throw Error("CSV line " + std::to_string(line_no) + " needs label plus features");
    }
    if (first_data_row) {
      width = fields.size();
      first_data_row = false;
    } else if (fields.size() != width) {
      throw Error("CSV line " + std::to_string(line_no) + " has " +
                  std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    }

    double label_value = 0.0;
    if (!parse_double(fields[0], label_value) || label_value != std::floor(label_value) ||
        label_value < 0) {
      throw Error("CSV line " + std::to_string(line_no) + " has invalid label '" + fields[0] +
                  "'");
    }
    labels.push_back(static_cast<int>(label_value));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_double(fields[i], v)) {
        throw Error("CSV line " + std::to_string(line_no) + " has invalid value '" +
                    fields[i] + "'");
      }
      features.push_back((v - norm.mean) / norm.stddev);
    }
  }
  if (labels.empty()) throw Error("CSV file '" + path + "' has no data rows");

  Dataset ds;
  ds.features = Tensor::from({labels.size(), width - 1}, std::move(features));
  ds.labels = std::move(labels);
  ds.num_classes = infer_num_classes(ds.labels, num_classes);
  ds.validate();
  return ds;
}

Tensor blob_centers(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
  if (num_classes < 2) throw Error("synth blobs need at least 2 classes");
  if (dim == 0) throw Error("synth blobs need dim >= 1");
  return Tensor::from({num_classes, dim}, make_centers(num_classes, dim, seed));
}

std::pair<Dataset, Dataset> synth_blobs(std::size_t num_classes, std::size_t n_per_class,
                                        std::size_t dim, double spread, std::uint64_t seed) {
  if (num_classes < 2) throw Error("synth blobs need at least 2 classes");
  if (dim == 0) throw Error("synth blobs need dim >= 1");
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw Error("spread must be positive, got " + std::to_string(spread));
  }
  if (n_per_class < 5) {
    throw Error("n_per_class must be at least 5 for the 80/20 split, got " +
                std::to_string(n_per_class));
  }

  const std::vector<double> centers = make_centers(num_classes, dim, seed);
  const std::size_t n_test = n_per_class / 5;
  const std::size_t n_train = n_per_class - n_test;

  Rng rng(split_seed(seed, 1));
  std::vector<double> train_features, test_features;
  std::vector<int> train_labels, test_labels;
  train_features.reserve(num_classes * n_train * dim);
  test_features.reserve(num_classes * n_test * dim);
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::vector<double>& out = (i < n_train) ? train_features : test_features;
      for (std::size_t d = 0; d < dim; ++d) {
        out.push_back(centers[k * dim + d] + spread * rng.normal());
      }
      if (i < n_train) {
        train_labels.push_back(static_cast<int>(k));
      } else {
        test_labels.push_back(static_cast<int>(k));
      }
    }
  }

  Dataset train;
  train.features = Tensor::from({train_labels.size(), dim}, std::move(train_features));
  train.labels = std::move(train_labels);
  train.num_classes = num_classes;
  train.split = "train";
  train.validate();

  Dataset test;
  test.features = Tensor::from({test_labels.size(), dim}, std::move(test_features));
  test.labels = std::move(test_labels);
  test.num_classes = num_classes;
  test.split = "test";
  test.validate();

  return {std::move(train), std::move(test)};
}

double nearest_center_accuracy(const Dataset& dataset, const Tensor& centers) {
  dataset.validate();
  if (centers.rank() != 2 || centers.shape()[0] != dataset.num_classes) {
    throw Error("centers must be [num_classes, dim]");
  }
  const std::size_t dim = centers.shape()[1];
  if (dataset.sample_shape() != Shape{dim}) {
    throw Error("dataset samples have shape " + shape_str(dataset.sample_shape()) +
                ", centers have dim " + std::to_string(dim));
  }
  std::span<const double> x = dataset.features.data();
  std::span<const double> c = centers.data();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::size_t best = 0;
    double best_dist = 0.0;
    for (std::size_t k = 0; k < dataset.num_classes; ++k) {
      double dist = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = x[i * dim + d] - c[k * dim + d];
        dist += diff * diff;
      }
      if (k == 0 || dist < best_dist) {
        best = k;
        best_dist = dist;
      }
    }
    if (static_cast<int>(best) == dataset.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

std::vector<Batch> batches(const Dataset& dataset, std::size_t batch_size, bool shuffle,
                           std::uint64_t seed, int epoch) {
  if (batch_size == 0) throw Error("batch_size must be positive");
  const std::size_t n = dataset.size();
  if (n == 0) throw Error("cannot batch an empty dataset");
  const Shape sample = dataset.sample_shape();
  const std::size_t sample_size = numel(sample);
  std::span<const double> x = dataset.features.data();

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n - 1; i >= 1; --i) {
      const std::size_t j = rng.below(i + 1);
      std::swap(perm[i], perm[j]);
    }
  }

  std::vector<Batch> out;
  out.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t b = std::min(batch_size, n - start);
    std::vector<double> features(b * sample_size);
    std::vector<int> labels(b);
    for (std::size_t r = 0; r < b; ++r) {
      const std::size_t src = perm[start + r];
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(src * sample_size), sample_size,
                  features.begin() + static_cast<std::ptrdiff_t>(r * sample_size));
      labels[r] = dataset.labels[src];
    }
    Shape batch_shape;
    batch_shape.push_back(b);
    batch_shape.insert(batch_shape.end(), sample.begin(), sample.end());
    out.push_back(Batch{Tensor::from(std::move(batch_shape), std::move(features)),
                        std::move(labels)});
  }
  return out;
}

}  // namespace distillkit
