// Copyright 2026 The memre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMRE_TENSOR_HPP_
#define MEMRE_TENSOR_HPP_

// Dense row-major float64 tensors with a dynamic reverse-mode trace.
//
// Every op records its inputs and a backward closure on the result node when
// gradient mode is on and at least one input requires a gradient. Node ids
// increase monotonically with creation, so descending id order is a valid
// reverse topological order for backward().

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace memre {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::uint64_t id = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Zero-initialized on first use.
  std::vector<double>& grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // 2-D convenience constructor from nested rows.
  static Tensor matrix(const std::vector<std::vector<double>>& rows,
                       bool requires_grad = false);
  static Tensor vector(std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t ndim() const { return shape().size(); }
  std::size_t numel() const;
  // Rows/cols of a 2-D tensor; a 1-D tensor is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  // Direct write access, meant for optimizer updates on leaves.
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  std::uint64_t id() const;
  const char* op() const;

  // Same values, no history, no gradient tracking.
  Tensor detach() const;
  // Deep copy of values with the given tracking flag.
  Tensor clone(bool requires_grad) const;

  explicit Tensor(std::shared_ptr<detail::Node> node)
      : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Gradient recording is on by default. While a guard is alive on the current
// thread ops produce plain values with no history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// --- linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// x W + b with b broadcast over rows.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

// --- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor neg(const Tensor& a);
Tensor sigmoid(const Tensor& x);
// ln(1 + e^z), branch-stable for large |z|.
Tensor softplus(const Tensor& x);
Tensor tanh(const Tensor& x);
// max(0, x); the derivative at exactly 0 is taken as 0.
Tensor relu(const Tensor& x);

// x[p x q] + bias[q] on every row.
Tensor add_row(const Tensor& x, const Tensor& bias);
// x[(P*n) x q] + tile[n x q], the tile repeated for each block of n rows.
Tensor add_tiled_rows(const Tensor& x, const Tensor& tile);

// --- reductions -----------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Per-column log sum exp over rows: [p x q] -> [q]. Max-subtracted.
Tensor logsumexp_rows(const Tensor& x);
// Row-wise softmax with max subtraction.
Tensor row_softmax(const Tensor& x);
// Row-wise (x - mean) / sqrt(var + eps), no gain or bias.
Tensor layer_norm(const Tensor& x, double eps = 1e-5);
// out[c] = sum_p mask[p,c] x[p,c] / sum_p mask[p,c]; 0 for an empty column.
Tensor masked_column_mean(const Tensor& x, std::span<const std::uint8_t> mask);

// --- structural -----------------------------------------------------------

// Stacks 2-D blocks (or 1-D rows) with equal column count.
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index);
Tensor reshape(const Tensor& x, Shape shape);
// a[(P*na) x q], b[(P*nb) x q] -> [(P*(na+nb)) x q], per-block interleave.
Tensor interleave_rows(const Tensor& a, std::size_t block_a, const Tensor& b,
                       std::size_t block_b);

// --- backward -------------------------------------------------------------

// Populates grad() on every tracked leaf reachable from a scalar loss.
// Leaf gradients accumulate across calls until zero_grad().
void backward(const Tensor& loss);

struct TraceRecord {
  std::string op;
  std::vector<std::uint64_t> inputs;
  std::uint64_t output = 0;
};

// Recorded history of `root` in creation (topological) order.
std::vector<TraceRecord> trace(const Tensor& root);

namespace detail {

// Builds a result node. History is attached only when grad mode is on and
// some input requires a gradient.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward);

void require_2d(const Tensor& t, const char* op);

}  // namespace detail

}  // namespace memre

#endif  // MEMRE_TENSOR_HPP_
