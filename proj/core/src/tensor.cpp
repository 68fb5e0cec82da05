// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "distillkit/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace distillkit {

namespace {

std::atomic<std::uint64_t> g_next_node_id{1};
thread_local bool g_grad_mode = true;

detail::NodePtr new_node(Shape shape, std::vector<double> data, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw Error("tensor extents must be positive, got " + shape_str(shape));
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->id = g_next_node_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw Error(std::string("undefined tensor passed to '") + op + "'");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(std::string("shape mismatch in '") + op + "': " + shape_str(a.shape()) +
                " vs " + shape_str(b.shape()));
  }
}

void check_axis(const Tensor& a, std::size_t axis, const char* op) {
  if (axis >= a.rank()) {
    throw Error(std::string("axis ") + std::to_string(axis) + " out of range for rank " +
                std::to_string(a.rank()) + " in '" + op + "'");
  }
}

// outer * extent * inner decomposition of a shape around one axis.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  out.reserve(shape.size() - 1);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  return out;
}

void accumulate(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_mode_enabled() { return g_grad_mode; }

NoGradGuard::NoGradGuard() : prev_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = prev_; }

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{}, {value}, requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::size_t n = numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  std::size_t n = numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (numel(shape) != data.size()) {
    throw Error("tensor data length " + std::to_string(data.size()) +
                " does not match shape " + shape_str(shape));
  }
  return Tensor(new_node(std::move(shape), std::move(data), requires_grad));
}

const Shape& Tensor::shape() const {
  if (!node_) throw Error("shape() on undefined tensor");
  return node_->shape;
}

std::size_t Tensor::size() const { return node_ ? node_->size() : 0; }
std::size_t Tensor::rank() const { return shape().size(); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::data() const {
  if (!node_) throw Error("data() on undefined tensor");
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) throw Error("mutable_data() on undefined tensor");
  if (!node_->is_leaf()) throw Error("mutable_data() is restricted to leaf tensors");
  return node_->data;
}

double Tensor::item() const {
  if (size() != 1) throw Error("item() requires a one-element tensor, got " + shape_str(shape()));
  return node_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size()) throw Error("at(): index rank mismatch");
  std::size_t flat = 0;
  std::size_t i = 0;
  for (std::size_t idx : index) {
    if (idx >= s[i]) throw Error("at(): index out of range");
    flat = flat * s[i] + idx;
    ++i;
  }
  return node_->data[flat];
}

std::span<const double> Tensor::grad() const {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const { distillkit::backward(*this); }

Tensor Tensor::detach() const {
  if (!node_) return Tensor();
  return Tensor(new_node(node_->shape, node_->data, false));
}

std::uint64_t Tensor::id() const { return node_ ? node_->id : 0; }

// ---------------------------------------------------------------------------
// Tape

Tape::Tape(const Tensor& root) {
  check_defined(root, "Tape");
  // Iterative postorder DFS: parents are emitted before the nodes that
  // consume them.
  std::unordered_set<const detail::TensorNode*> visited;
  std::vector<std::pair<detail::NodePtr, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      detail::NodePtr parent = node->parents[next_parent++];
      if (visited.insert(parent.get()).second) {
        stack.emplace_back(std::move(parent), 0);
      }
    } else {
      order_.push_back(node);
      stack.pop_back();
    }
  }
  for (const auto& node : order_) {
    if (node->is_leaf()) continue;
    TapeEntry entry;
    entry.output_id = node->id;
    entry.op = node->op;
    for (const auto& parent : node->parents) entry.input_ids.push_back(parent->id);
    entries_.push_back(std::move(entry));
  }
}

void Tape::backward() {
  // Interior gradients are scratch: reset every sweep. Leaf gradients are
  // allocated on demand and accumulate across sweeps.
  for (const auto& node : order_) {
    if (!node->requires_grad) continue;
    if (node->is_leaf()) {
      if (node->grad.empty()) node->grad.assign(node->size(), 0.0);
    } else {
      node->grad.assign(node->size(), 0.0);
    }
  }
  detail::TensorNode& root = *order_.back();
  if (root.requires_grad) root.grad[0] += 1.0;

  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    detail::TensorNode& node = **it;
    if (node.is_leaf() || !node.requires_grad || !node.backprop) continue;
    std::vector<std::span<double>> grad_in;
    grad_in.reserve(node.parents.size());
    for (const auto& parent : node.parents) {
      if (parent->requires_grad) {
        grad_in.emplace_back(parent->grad);
      } else {
        grad_in.emplace_back();
      }
    }
    node.backprop(node, grad_in);
  }
}

void backward(const Tensor& scalar_loss) {
  check_defined(scalar_loss, "backward");
  if (scalar_loss.size() != 1) {
    throw Error("backward requires a scalar loss, got shape " + shape_str(scalar_loss.shape()));
  }
  if (!scalar_loss.requires_grad()) return;
  Tape tape(scalar_loss);
  tape.backward();
}

void zero_grad(std::span<Tensor> params) {
  for (Tensor& p : params) p.zero_grad();
}

// ---------------------------------------------------------------------------
// Op plumbing

Tensor make_op(const char* name, Shape shape, std::vector<double> data,
               std::vector<Tensor> inputs, detail::BackpropFn backprop) {
  if (numel(shape) != data.size()) {
    throw Error(std::string("internal: op '") + name + "' produced " +
                std::to_string(data.size()) + " values for shape " + shape_str(shape));
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw Error(std::string("non-finite result in op '") + name + "'");
    }
  }
  bool needs_grad = false;
  if (g_grad_mode) {
    for (const Tensor& t : inputs) needs_grad = needs_grad || t.requires_grad();
  }
  detail::NodePtr node = new_node(std::move(shape), std::move(data), needs_grad);
  if (needs_grad) {
    node->op = name;
    node->backprop = std::move(backprop);
    node->parents.reserve(inputs.size());
    for (const Tensor& t : inputs) node->parents.push_back(t.node());
  }
  return Tensor(node);
}

// ---------------------------------------------------------------------------
// Forward ops

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] + db[i];
  return make_op("add", a.shape(), std::move(out), {a, b},
                 [](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (!g[0].empty()) accumulate(g[0], self.grad);
                   if (!g[1].empty()) accumulate(g[1], self.grad);
                 });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_defined(a, "sub");
  check_defined(b, "sub");
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] - db[i];
  return make_op("sub", a.shape(), std::move(out), {a, b},
                 [](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (!g[0].empty()) accumulate(g[0], self.grad);
                   if (!g[1].empty()) {
                     for (std::size_t i = 0; i < g[1].size(); ++i) g[1][i] -= self.grad[i];
                   }
                 });
}

Tensor mul_elementwise(const Tensor& a, const Tensor& b) {
  check_defined(a, "mul_elementwise");
  check_defined(b, "mul_elementwise");
  check_same_shape(a, b, "mul_elementwise");
  std::vector<double> out(a.size());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * db[i];
  return make_op("mul_elementwise", a.shape(), std::move(out), {a, b},
                 [a, b](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   auto da = a.data(), db = b.data();
                   if (!g[0].empty()) {
                     for (std::size_t i = 0; i < g[0].size(); ++i) g[0][i] += self.grad[i] * db[i];
                   }
                   if (!g[1].empty()) {
                     for (std::size_t i = 0; i < g[1].size(); ++i) g[1][i] += self.grad[i] * da[i];
                   }
                 });
}

Tensor scalar_mul(const Tensor& a, double s) {
  check_defined(a, "scalar_mul");
  if (!std::isfinite(s)) throw Error("non-finite scalar in 'scalar_mul'");
  std::vector<double> out(a.size());
  auto da = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * s;
  return make_op("scalar_mul", a.shape(), std::move(out), {a},
                 [s](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (!g[0].empty()) {
                     for (std::size_t i = 0; i < g[0].size(); ++i) g[0][i] += self.grad[i] * s;
                   }
                 });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw Error("matmul expects [m,k] x [k,n], got " + shape_str(a.shape()) + " x " +
                shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = da[i * k + p];
      const double* brow = &db[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return make_op(
      "matmul", Shape{m, n}, std::move(out), {a, b},
      [a, b, m, k, n](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
        auto da = a.data(), db = b.data();
        if (!g[0].empty()) {
          // dA = dC * B^T
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              const double* grow = &self.grad[i * n];
              const double* brow = &db[p * n];
              for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              g[0][i * k + p] += acc;
            }
          }
        }
        if (!g[1].empty()) {
          // dB = A^T * dC
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = &self.grad[i * n];
            for (std::size_t p = 0; p < k; ++p) {
              const double av = da[i * k + p];
              double* brow = &g[1][p * n];
              for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
            }
          }
        }
      });
}

Tensor relu(const Tensor& a) {
  check_defined(a, "relu");
  std::vector<double> out(a.size());
  auto da = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] > 0.0 ? da[i] : 0.0;
  return make_op("relu", a.shape(), std::move(out), {a},
                 [a](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   auto da = a.data();
                   for (std::size_t i = 0; i < g[0].size(); ++i) {
                     if (da[i] > 0.0) g[0][i] += self.grad[i];
                   }
                 });
}

Tensor exp(const Tensor& a) {
  check_defined(a, "exp");
  std::vector<double> out(a.size());
  auto da = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(da[i]);
  return make_op("exp", a.shape(), std::move(out), {a},
                 [](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   for (std::size_t i = 0; i < g[0].size(); ++i) {
                     g[0][i] += self.grad[i] * self.data[i];
                   }
                 });
}

Tensor log(const Tensor& a) {
  check_defined(a, "log");
  std::vector<double> out(a.size());
  auto da = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(da[i] > 0.0)) throw Error("log of non-positive value");
    out[i] = std::log(da[i]);
  }
  return make_op("log", a.shape(), std::move(out), {a},
                 [a](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   auto da = a.data();
                   for (std::size_t i = 0; i < g[0].size(); ++i) g[0][i] += self.grad[i] / da[i];
                 });
}

Tensor sum(const Tensor& a) {
  check_defined(a, "sum");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return make_op("sum", Shape{}, {acc}, {a},
                 [](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   for (std::size_t i = 0; i < g[0].size(); ++i) g[0][i] += self.grad[0];
                 });
}

Tensor sum(const Tensor& a, std::size_t axis) {
  check_defined(a, "sum");
  check_axis(a, axis, "sum");
  const AxisSplit s = split_at(a.shape(), axis);
  std::vector<double> out(s.outer * s.inner, 0.0);
  auto da = a.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        out[o * s.inner + i] += da[(o * s.extent + e) * s.inner + i];
      }
    }
  }
  return make_op("sum_axis", drop_axis(a.shape(), axis), std::move(out), {a},
                 [s](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   for (std::size_t o = 0; o < s.outer; ++o) {
                     for (std::size_t e = 0; e < s.extent; ++e) {
                       for (std::size_t i = 0; i < s.inner; ++i) {
                         g[0][(o * s.extent + e) * s.inner + i] += self.grad[o * s.inner + i];
                       }
                     }
                   }
                 });
}

Tensor mean(const Tensor& a) {
  check_defined(a, "mean");
  if (a.size() == 0) throw Error("mean of empty tensor");
  return scalar_mul(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor mean(const Tensor& a, std::size_t axis) {
  check_defined(a, "mean");
  check_axis(a, axis, "mean");
  const double extent = static_cast<double>(a.shape()[axis]);
  return scalar_mul(sum(a, axis), 1.0 / extent);
}

Tensor max(const Tensor& a, std::size_t axis) {
  check_defined(a, "max");
  check_axis(a, axis, "max");
  const AxisSplit s = split_at(a.shape(), axis);
  std::vector<double> out(s.outer * s.inner, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> argmax(s.outer * s.inner, 0);
  auto da = a.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const double v = da[(o * s.extent + e) * s.inner + i];
        const std::size_t oi = o * s.inner + i;
        if (v > out[oi]) {
          out[oi] = v;
          argmax[oi] = e;
        }
      }
    }
  }
  return make_op(
      "max_axis", drop_axis(a.shape(), axis), std::move(out), {a},
      [s, argmax = std::move(argmax)](const detail::TensorNode& self,
                                      const std::vector<std::span<double>>& g) {
        if (g[0].empty()) return;
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t oi = o * s.inner + i;
            g[0][(o * s.extent + argmax[oi]) * s.inner + i] += self.grad[oi];
          }
        }
      });
}

Tensor reshape(const Tensor& a, Shape new_shape) {
  check_defined(a, "reshape");
  if (numel(new_shape) != a.size()) {
    throw Error("reshape from " + shape_str(a.shape()) + " to " + shape_str(new_shape) +
                " changes element count");
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_op("reshape", std::move(new_shape), std::move(out), {a},
                 [](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   if (!g[0].empty()) accumulate(g[0], self.grad);
                 });
}

Tensor broadcast_to(const Tensor& a, const Shape& target) {
  check_defined(a, "broadcast_to");
  const Shape& src = a.shape();
  if (src.size() > target.size()) {
    throw Error("broadcast_to cannot reduce rank: " + shape_str(src) + " to " +
                shape_str(target));
  }
  const std::size_t offset = target.size() - src.size();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] != target[offset + i] && src[i] != 1) {
      throw Error("broadcast_to: source " + shape_str(src) + " incompatible with target " +
                  shape_str(target));
    }
  }
  // Row-major strides with zeroes on broadcast axes.
  std::vector<std::size_t> stride(target.size(), 0);
  {
    std::size_t s = 1;
    for (std::size_t i = src.size(); i-- > 0;) {
      stride[offset + i] = (src[i] == 1) ? 0 : s;
      s *= src[i];
    }
  }
  const std::size_t out_n = numel(target);
  std::vector<double> out(out_n);
  auto da = a.data();
  Shape tgt = target;
  auto source_index = [&](std::size_t flat) {
    std::size_t idx = 0;
    for (std::size_t i = tgt.size(); i-- > 0;) {
      idx += (flat % tgt[i]) * stride[i];
      flat /= tgt[i];
    }
    return idx;
  };
  for (std::size_t i = 0; i < out_n; ++i) out[i] = da[source_index(i)];
  return make_op("broadcast_to", target, std::move(out), {a},
                 [tgt, stride](const detail::TensorNode& self,
                               const std::vector<std::span<double>>& g) {
                   if (g[0].empty()) return;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     std::size_t flat = i, idx = 0;
                     for (std::size_t d = tgt.size(); d-- > 0;) {
                       idx += (flat % tgt[d]) * stride[d];
                       flat /= tgt[d];
                     }
                     g[0][idx] += self.grad[i];
                   }
                 });
}

Tensor log_softmax(const Tensor& logits, std::size_t axis) {
  check_defined(logits, "log_softmax");
  check_axis(logits, axis, "log_softmax");
  for (double v : logits.data()) {
    if (!std::isfinite(v)) throw Error("non-finite input to 'log_softmax'");
  }
  const AxisSplit s = split_at(logits.shape(), axis);
  std::vector<double> out(logits.size());
  auto da = logits.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < s.extent; ++e) {
        mx = std::max(mx, da[(o * s.extent + e) * s.inner + i]);
      }
      double lse = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        lse += std::exp(da[(o * s.extent + e) * s.inner + i] - mx);
      }
      lse = std::log(lse) + mx;
      for (std::size_t e = 0; e < s.extent; ++e) {
        const std::size_t k = (o * s.extent + e) * s.inner + i;
        out[k] = da[k] - lse;
      }
    }
  }
  return make_op("log_softmax", logits.shape(), std::move(out), {logits},
                 [s](const detail::TensorNode& self, const std::vector<std::span<double>>& g) {
                   // dz = dy - softmax(z) * sum(dy) per slice
                   if (g[0].empty()) return;
                   for (std::size_t o = 0; o < s.outer; ++o) {
                     for (std::size_t i = 0; i < s.inner; ++i) {
                       double gsum = 0.0;
                       for (std::size_t e = 0; e < s.extent; ++e) {
                         gsum += self.grad[(o * s.extent + e) * s.inner + i];
                       }
                       for (std::size_t e = 0; e < s.extent; ++e) {
                         const std::size_t k = (o * s.extent + e) * s.inner + i;
                         g[0][k] += self.grad[k] - std::exp(self.data[k]) * gsum;
                       }
                     }
                   }
                 });
}

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                            double h) {
  check_defined(x, "finite_diff_gradient");
  if (!(h > 0.0)) throw Error("finite_diff_gradient requires h > 0");
  std::vector<double> base(x.data().begin(), x.data().end());
  std::vector<double> grad(x.size());
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> hi = base, lo = base;
    hi[i] += h;
    lo[i] -= h;
    const double fp = f(Tensor::from(x.shape(), std::move(hi)));
    const double fm = f(Tensor::from(x.shape(), std::move(lo)));
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error("non-finite evaluation in finite_diff_gradient");
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return Tensor::from(x.shape(), std::move(grad));
}

}  // namespace distillkit
