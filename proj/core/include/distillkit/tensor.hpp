// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "distillkit/error.hpp"

namespace distillkit {

// Dense float64 tensors with reverse-mode autodiff. A forward op records a
// node carrying a local gradient rule whenever any input requires gradients;
// backward() linearizes the recorded graph into a Tape and sweeps it once in
// reverse. Every forward op validates that its result is finite and throws
// otherwise. One graph and its tensors belong to a single thread.

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// Local gradient rule. `self` is the op's output node (self.grad holds the
// upstream gradient, self.data the forward result); grad_in has one span per
// input, empty when that input takes no gradient.
using BackpropFn =
    std::function<void(const TensorNode& self, const std::vector<std::span<double>>& grad_in)>;

struct TensorNode {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // persistent on leaves, scratch on interior nodes
  std::vector<NodePtr> parents;
  BackpropFn backprop;
  const char* op = nullptr;  // nullptr on leaves

  bool is_leaf() const { return parents.empty(); }
  std::size_t size() const { return data.size(); }
};

}  // namespace detail

bool grad_mode_enabled();

// Suspends graph recording for its lifetime (evaluation, frozen-teacher
// forwards). Nestable.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const;
  bool requires_grad() const;

  std::span<const double> data() const;
  // In-place access for parameter updates; leaves only.
  std::span<double> mutable_data();

  double item() const;  // value of a one-element tensor
  double at(std::initializer_list<std::size_t> index) const;

  std::span<const double> grad() const;  // empty when no gradient is held
  void zero_grad();

  void backward() const;

  // Detached copy: same values, no graph, no gradient requirement.
  Tensor detach() const;

  std::uint64_t id() const;

  detail::NodePtr node() const { return node_; }
  explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

 private:
  detail::NodePtr node_;
};

// One recorded operation as seen by the backward sweep.
struct TapeEntry {
  std::uint64_t output_id = 0;
  std::vector<std::uint64_t> input_ids;
  const char* op = nullptr;
};

// Topological linearization of the graph below a root: every node's inputs
// precede it, and the backward sweep visits each node exactly once.
class Tape {
 public:
  explicit Tape(const Tensor& root);

  // Recorded ops in topological order (leaves excluded).
  const std::vector<TapeEntry>& entries() const { return entries_; }
  std::size_t node_count() const { return order_.size(); }

  // Reverse sweep: seeds d(root)/d(root)=1 and accumulates into every
  // gradient-requiring leaf. Interior scratch gradients are reset per sweep;
  // leaf gradients accumulate across sweeps.
  void backward();

 private:
  std::vector<detail::NodePtr> order_;
  std::vector<TapeEntry> entries_;
};

void backward(const Tensor& scalar_loss);
void zero_grad(std::span<Tensor> params);

// Forward ops. Shapes must match exactly except where stated; every op
// rejects non-finite results.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul_elementwise(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);  // 2-D only
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // strictly positive inputs
Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, std::size_t axis);
Tensor max(const Tensor& a, std::size_t axis);  // ties resolve to the first maximum
Tensor reshape(const Tensor& a, Shape new_shape);
// Explicit broadcast: trailing axes aligned, source extents must equal the
// target or be 1; missing leading axes are treated as 1.
Tensor broadcast_to(const Tensor& a, const Shape& target);
// z - logsumexp(z) along `axis`, computed with max subtraction.
Tensor log_softmax(const Tensor& logits, std::size_t axis);

// Registers a custom differentiable op on the shared tape machinery.
Tensor make_op(const char* name, Shape shape, std::vector<double> data,
               std::vector<Tensor> inputs, detail::BackpropFn backprop);

// Central-difference gradient oracle: (f(x+h e_i) - f(x-h e_i)) / 2h.
// Independent of the autodiff path; used to check it.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                            double h = 1e-5);

}  // namespace distillkit
