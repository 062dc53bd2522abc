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

#include "memre/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "memre/errors.hpp"

namespace memre {
namespace {

std::atomic<std::uint64_t> next_node_id{1};
thread_local bool grad_enabled = true;

std::shared_ptr<detail::Node> new_node(Shape shape, std::vector<double> value,
                                       bool requires_grad) {
  if (value.size() != shape_numel(shape)) {
    throw DimensionError("tensor: " + std::to_string(value.size()) +
                         " values for shape " + shape_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  node->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  return node;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " +
                         shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

// Elementwise unary op; `derivative(x, y)` gives dy/dx.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd forward, Deriv derivative) {
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  return detail::make_result(
      op, x.shape(), std::move(out), {x},
      [derivative](detail::Node& self) {
        auto& input = *self.inputs[0];
        if (!input.requires_grad) return;
        auto& g = input.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += self.grad[i] * derivative(input.value[i], self.value[i]);
        }
      });
}

double stable_softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

// --- Tensor ----------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0),
                         requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows,
                      bool requires_grad) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("matrix: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return from({rows.size(), cols}, std::move(flat), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const auto n = values.size();
  return from({n}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::numel() const { return node_->value.size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  if (s.size() == 1) return 1;
  if (s.size() != 2) throw DimensionError("rows(): tensor is not 2-D");
  return s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.size() == 1) return s[0];
  if (s.size() != 2) throw DimensionError("cols(): tensor is not 2-D");
  return s[1];
}

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::mutable_values() { return node_->value; }

double Tensor::item() const {
  if (numel() != 1) throw PreconditionError("item(): tensor is not a scalar");
  return node_->value[0];
}

double Tensor::at(std::size_t i) const { return node_->value.at(i); }
double Tensor::at(std::size_t row, std::size_t col) const {
  return node_->value.at(row * cols() + col);
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
void Tensor::zero_grad() { node_->grad.clear(); }
std::uint64_t Tensor::id() const { return node_->id; }
const char* Tensor::op() const { return node_->op; }

Tensor Tensor::detach() const {
  return Tensor(new_node(shape(), node_->value, false));
}

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(new_node(shape(), node_->value, requires_grad));
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool grad_mode_enabled() { return grad_enabled; }

Tensor detail::make_result(const char* op, Shape shape,
                           std::vector<double> value,
                           std::vector<Tensor> inputs,
                           std::function<void(Node&)> backward) {
  bool track = false;
  if (grad_enabled) {
    for (const auto& in : inputs) track = track || in.requires_grad();
  }
  auto node = new_node(std::move(shape), std::move(value), track);
  node->op = op;
  if (track) {
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void detail::require_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2) {
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " +
                         shape_string(t.shape()));
  }
}

// --- linear algebra ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_2d(a, "matmul");
  detail::require_2d(b, "matmul");
  const std::size_t p = a.shape()[0], q = a.shape()[1], s = b.shape()[1];
  if (b.shape()[0] != q) {
    throw DimensionError("matmul: inner extents " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()) + " disagree");
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(p * s, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    double* orow = out.data() + i * s;
    for (std::size_t k = 0; k < q; ++k) {
      const double aik = av[i * q + k];
      if (aik == 0.0) continue;
      const double* brow = bv.data() + k * s;
      for (std::size_t j = 0; j < s; ++j) orow[j] += aik * brow[j];
    }
  }
  return detail::make_result(
      "matmul", {p, s}, std::move(out), {a, b},
      [p, q, s](detail::Node& self) {
        auto& an = *self.inputs[0];
        auto& bn = *self.inputs[1];
        const double* g = self.grad.data();
        if (an.requires_grad) {
          auto& ga = an.grad_buffer();
          for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = 0; k < q; ++k) {
              const double* brow = bn.value.data() + k * s;
              const double* grow = g + i * s;
              double acc = 0.0;
              for (std::size_t j = 0; j < s; ++j) acc += grow[j] * brow[j];
              ga[i * q + k] += acc;
            }
          }
        }
        if (bn.requires_grad) {
          auto& gb = bn.grad_buffer();
          for (std::size_t i = 0; i < p; ++i) {
            const double* grow = g + i * s;
            for (std::size_t k = 0; k < q; ++k) {
              const double aik = an.value[i * q + k];
              if (aik == 0.0) continue;
              double* gbrow = gb.data() + k * s;
              for (std::size_t j = 0; j < s; ++j) gbrow[j] += aik * grow[j];
            }
          }
        }
      });
}

Tensor transpose(const Tensor& a) {
  detail::require_2d(a, "transpose");
  const std::size_t p = a.shape()[0], q = a.shape()[1];
  const auto av = a.values();
  std::vector<double> out(p * q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) out[j * p + i] = av[i * q + j];
  return detail::make_result(
      "transpose", {q, p}, std::move(out), {a}, [p, q](detail::Node& self) {
        auto& in = *self.inputs[0];
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < q; ++j)
            g[i * q + j] += self.grad[j * p + i];
      });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

// --- elementwise ---------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return detail::make_result(
      "add", a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (auto& in : self.inputs) {
          if (!in->requires_grad) continue;
          auto& g = in->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return detail::make_result(
      "sub", a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        if (self.inputs[0]->requires_grad) {
          auto& g = self.inputs[0]->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (self.inputs[1]->requires_grad) {
          auto& g = self.inputs[1]->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return detail::make_result(
      "mul", a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        auto& an = *self.inputs[0];
        auto& bn = *self.inputs[1];
        if (an.requires_grad) {
          auto& g = an.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += self.grad[i] * bn.value[i];
        }
        if (bn.requires_grad) {
          auto& g = bn.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += self.grad[i] * an.value[i];
        }
      });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x, stable_sigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x) {
  return unary("softplus", x, stable_softplus,
               [](double z, double) { return stable_sigmoid(z); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double z) { return std::tanh(z); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double z) { return z > 0.0 ? z : 0.0; },
      [](double z, double) { return z > 0.0 ? 1.0 : 0.0; });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  detail::require_2d(x, "add_row");
  const std::size_t p = x.shape()[0], q = x.shape()[1];
  if (bias.numel() != q) {
    throw DimensionError("add_row: bias " + shape_string(bias.shape()) +
                         " vs columns " + std::to_string(q));
  }
  const auto xv = x.values();
  const auto bv = bias.values();
  std::vector<double> out(p * q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) out[i * q + j] = xv[i * q + j] + bv[j];
  return detail::make_result(
      "add_row", {p, q}, std::move(out), {x, bias},
      [p, q](detail::Node& self) {
        if (self.inputs[0]->requires_grad) {
          auto& g = self.inputs[0]->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (self.inputs[1]->requires_grad) {
          auto& g = self.inputs[1]->grad_buffer();
          for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < q; ++j) g[j] += self.grad[i * q + j];
        }
      });
}

Tensor add_tiled_rows(const Tensor& x, const Tensor& tile) {
  detail::require_2d(x, "add_tiled_rows");
  detail::require_2d(tile, "add_tiled_rows");
  const std::size_t rows = x.shape()[0], q = x.shape()[1];
  const std::size_t n = tile.shape()[0];
  if (tile.shape()[1] != q || n == 0 || rows % n != 0) {
    throw DimensionError("add_tiled_rows: " + shape_string(x.shape()) +
                         " is not a whole tiling of " +
                         shape_string(tile.shape()));
  }
  const auto xv = x.values();
  const auto tv = tile.values();
  std::vector<double> out(rows * q);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < q; ++j)
      out[i * q + j] = xv[i * q + j] + tv[(i % n) * q + j];
  return detail::make_result(
      "add_tiled_rows", {rows, q}, std::move(out), {x, tile},
      [rows, q, n](detail::Node& self) {
        if (self.inputs[0]->requires_grad) {
          auto& g = self.inputs[0]->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (self.inputs[1]->requires_grad) {
          auto& g = self.inputs[1]->grad_buffer();
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < q; ++j)
              g[(i % n) * q + j] += self.grad[i * q + j];
        }
      });
}

// --- reductions ------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return detail::make_result("sum", {}, {total}, {x}, [](detail::Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (auto& gi : g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw PreconditionError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor logsumexp_rows(const Tensor& x) {
  const std::size_t p = x.rows(), q = x.cols();
  if (p == 0) throw PreconditionError("logsumexp_rows: no rows");
  const auto xv = x.values();
  std::vector<double> out(q);
  for (std::size_t j = 0; j < q; ++j) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p; ++i) hi = std::max(hi, xv[i * q + j]);
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) acc += std::exp(xv[i * q + j] - hi);
    out[j] = hi + std::log(acc);
  }
  return detail::make_result(
      "logsumexp_rows", {q}, std::move(out), {x}, [p, q](detail::Node& self) {
        auto& in = *self.inputs[0];
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < q; ++j)
            g[i * q + j] +=
                self.grad[j] * std::exp(in.value[i * q + j] - self.value[j]);
      });
}

Tensor row_softmax(const Tensor& x) {
  const std::size_t p = x.rows(), q = x.cols();
  const auto xv = x.values();
  std::vector<double> out(p * q);
  for (std::size_t i = 0; i < p; ++i) {
    const double* row = xv.data() + i * q;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q; ++j) hi = std::max(hi, row[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      out[i * q + j] = std::exp(row[j] - hi);
      total += out[i * q + j];
    }
    for (std::size_t j = 0; j < q; ++j) out[i * q + j] /= total;
  }
  return detail::make_result(
      "row_softmax", x.shape(), std::move(out), {x},
      [p, q](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < p; ++i) {
          const double* y = self.value.data() + i * q;
          const double* gy = self.grad.data() + i * q;
          double dot = 0.0;
          for (std::size_t j = 0; j < q; ++j) dot += y[j] * gy[j];
          for (std::size_t j = 0; j < q; ++j)
            g[i * q + j] += y[j] * (gy[j] - dot);
        }
      });
}

Tensor layer_norm(const Tensor& x, double eps) {
  const std::size_t p = x.rows(), q = x.cols();
  const auto xv = x.values();
  std::vector<double> out(p * q);
  std::vector<double> inv_std(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double* row = xv.data() + i * q;
    double mu = 0.0;
    for (std::size_t j = 0; j < q; ++j) mu += row[j];
    mu /= static_cast<double>(q);
    double var = 0.0;
    for (std::size_t j = 0; j < q; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(q);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < q; ++j)
      out[i * q + j] = (row[j] - mu) * inv_std[i];
  }
  return detail::make_result(
      "layer_norm", x.shape(), std::move(out), {x},
      [p, q, inv_std = std::move(inv_std)](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        const double nq = static_cast<double>(q);
        for (std::size_t i = 0; i < p; ++i) {
          const double* y = self.value.data() + i * q;
          const double* gy = self.grad.data() + i * q;
          double mean_g = 0.0, mean_gy = 0.0;
          for (std::size_t j = 0; j < q; ++j) {
            mean_g += gy[j];
            mean_gy += gy[j] * y[j];
          }
          mean_g /= nq;
          mean_gy /= nq;
          for (std::size_t j = 0; j < q; ++j)
            g[i * q + j] += inv_std[i] * (gy[j] - mean_g - y[j] * mean_gy);
        }
      });
}

Tensor masked_column_mean(const Tensor& x, std::span<const std::uint8_t> mask) {
  detail::require_2d(x, "masked_column_mean");
  const std::size_t p = x.shape()[0], q = x.shape()[1];
  if (mask.size() != p * q) {
    throw DimensionError("masked_column_mean: mask size mismatch");
  }
  const auto xv = x.values();
  std::vector<double> counts(q, 0.0), out(q, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j)
      if (mask[i * q + j]) {
        out[j] += xv[i * q + j];
        counts[j] += 1.0;
      }
  for (std::size_t j = 0; j < q; ++j)
    if (counts[j] > 0.0) out[j] /= counts[j];
  std::vector<std::uint8_t> saved(mask.begin(), mask.end());
  return detail::make_result(
      "masked_column_mean", {q}, std::move(out), {x},
      [p, q, counts = std::move(counts),
       saved = std::move(saved)](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < q; ++j)
            if (saved[i * q + j]) g[i * q + j] += self.grad[j] / counts[j];
      });
}

// --- structural ------------------------------------------------------------------

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_rows(parts);
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw PreconditionError("concat_rows: nothing to stack");
  const std::size_t q = parts.front().cols();
  std::size_t total_rows = 0;
  for (const auto& part : parts) {
    if (part.ndim() > 2 || part.cols() != q) {
      throw DimensionError("concat_rows: column count mismatch, " +
                           shape_string(part.shape()) + " vs " +
                           std::to_string(q));
    }
    total_rows += part.rows();
  }
  std::vector<double> out;
  out.reserve(total_rows * q);
  std::vector<std::size_t> offsets;
  for (const auto& part : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), part.values().begin(), part.values().end());
  }
  return detail::make_result(
      "concat_rows", {total_rows, q}, std::move(out),
      std::vector<Tensor>(parts.begin(), parts.end()),
      [offsets = std::move(offsets)](detail::Node& self) {
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
          auto& in = *self.inputs[k];
          if (!in.requires_grad) continue;
          auto& g = in.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += self.grad[offsets[k] + i];
        }
      });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index) {
  const std::size_t p = x.rows(), q = x.cols();
  const auto xv = x.values();
  std::vector<double> out(index.size() * q);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= p) {
      throw DimensionError("gather_rows: row " + std::to_string(index[r]) +
                           " out of range " + std::to_string(p));
    }
    std::copy_n(xv.data() + index[r] * q, q, out.data() + r * q);
  }
  std::vector<std::size_t> saved(index.begin(), index.end());
  return detail::make_result(
      "gather_rows", {index.size(), q}, std::move(out), {x},
      [q, saved = std::move(saved)](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < saved.size(); ++r)
          for (std::size_t j = 0; j < q; ++j)
            g[saved[r] * q + j] += self.grad[r * q + j];
      });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " to " +
                         shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return detail::make_result(
      "reshape", std::move(shape), std::move(out), {x},
      [](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
}

Tensor interleave_rows(const Tensor& a, std::size_t block_a, const Tensor& b,
                       std::size_t block_b) {
  detail::require_2d(a, "interleave_rows");
  detail::require_2d(b, "interleave_rows");
  const std::size_t q = a.shape()[1];
  if (b.shape()[1] != q || block_a == 0 || block_b == 0 ||
      a.shape()[0] % block_a != 0 || b.shape()[0] % block_b != 0 ||
      a.shape()[0] / block_a != b.shape()[0] / block_b) {
    throw DimensionError("interleave_rows: incompatible blocks " +
                         shape_string(a.shape()) + " / " +
                         shape_string(b.shape()));
  }
  const std::size_t blocks = a.shape()[0] / block_a;
  const std::size_t width = block_a + block_b;
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(blocks * width * q);
  for (std::size_t k = 0; k < blocks; ++k) {
    std::copy_n(av.data() + k * block_a * q, block_a * q,
                out.data() + k * width * q);
    std::copy_n(bv.data() + k * block_b * q, block_b * q,
                out.data() + (k * width + block_a) * q);
  }
  return detail::make_result(
      "interleave_rows", {blocks * width, q}, std::move(out), {a, b},
      [blocks, block_a, block_b, width, q](detail::Node& self) {
        auto& an = *self.inputs[0];
        auto& bn = *self.inputs[1];
        for (std::size_t k = 0; k < blocks; ++k) {
          const double* src = self.grad.data() + k * width * q;
          if (an.requires_grad) {
            auto& g = an.grad_buffer();
            for (std::size_t i = 0; i < block_a * q; ++i)
              g[k * block_a * q + i] += src[i];
          }
          if (bn.requires_grad) {
            auto& g = bn.grad_buffer();
            for (std::size_t i = 0; i < block_b * q; ++i)
              g[k * block_b * q + i] += src[block_a * q + i];
          }
        }
      });
}

// --- backward --------------------------------------------------------------------

namespace {

std::vector<detail::Node*> reachable(const Tensor& root) {
  std::vector<detail::Node*> order;
  std::unordered_set<const detail::Node*> seen;
  std::vector<detail::Node*> stack{root.node().get()};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto* node = stack.back();
    stack.pop_back();
    order.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) {
        stack.push_back(in.get());
      }
    }
  }
  std::sort(order.begin(), order.end(),
            [](const auto* x, const auto* y) { return x->id > y->id; });
  return order;
}

}  // namespace

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw PreconditionError("backward: loss must be a scalar");
  }
  if (!loss.requires_grad()) return;
  auto order = reachable(loss);
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto* node : order) {
    if (!node->backward || node->grad.empty()) continue;
    node->backward(*node);
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

std::vector<TraceRecord> trace(const Tensor& root) {
  auto order = reachable(root);
  std::vector<TraceRecord> records;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TraceRecord rec;
    rec.op = (*it)->op;
    rec.output = (*it)->id;
    for (const auto& in : (*it)->inputs) rec.inputs.push_back(in->id);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace memre
