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

#include <cmath>
#include <set>

#include "doctest.h"
#include "gradcheck.hpp"
#include "memre/errors.hpp"
#include "memre/tensor.hpp"

namespace memre {
namespace {

TEST_CASE("every op passes a finite-difference check") {
  Rng rng(11);
  for (const auto& c : testing::gradient_cases()) {
    CAPTURE(c.name);
    testing::GradCheckResult total;
    for (int point = 0; point < 5; ++point) total.merge(c.run(rng));
    CAPTURE(total.worst_where);
    CHECK(total.checked > 0);
    CHECK(total.failures == 0);
  }
}

TEST_CASE("the checker catches a wrong gradient") {
  Rng rng(1);
  const Tensor x = testing::random_tensor({4}, rng);
  auto doubled_wrong = [&] {
    std::vector<double> v(x.values().begin(), x.values().end());
    for (auto& e : v) e *= e;
    return detail::make_result("bad_square", x.shape(), std::move(v), {x},
                               [x](detail::Node& self) {
                                 auto& g = x.node()->grad_buffer();
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   g[i] += self.grad[i] * x.values()[i];  // 2x missing
                                 }
                               });
  };
  const auto r = testing::check_gradients([&] { return sum(doubled_wrong()); },
                                          {x}, rng);
  CHECK(r.failures == 4);
  CHECK(r.worst_rel == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("matmul values") {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor b = Tensor::matrix({{5, 6}, {7, 8}});
  const Tensor c = matmul(a, b);
  CHECK(c.at(0, 0) == 19);
  CHECK(c.at(0, 1) == 22);
  CHECK(c.at(1, 0) == 43);
  CHECK(c.at(1, 1) == 50);
}

TEST_CASE("shape mismatches throw") {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
  CHECK_THROWS_AS(add(a, Tensor::zeros({3, 2})), DimensionError);
  CHECK_THROWS_AS(reshape(a, {4, 2}), DimensionError);
  CHECK_THROWS_AS(concat_rows(a, Tensor::zeros({1, 2})), DimensionError);
}

TEST_CASE("softplus saturates without overflow") {
  const Tensor x = Tensor::vector({-1000.0, -40.0, 0.0, 40.0, 1000.0});
  const Tensor y = softplus(x);
  CHECK(y.at(0) >= 0.0);
  CHECK(y.at(0) < 1e-300);
  CHECK(y.at(2) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(y.at(3) == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(y.at(4) == 1000.0);
}

TEST_CASE("softmax and logsumexp are shift-stable") {
  const Tensor x = Tensor::matrix({{1000.0, 1001.0, 999.0}});
  const Tensor s = row_softmax(x);
  double total = 0.0;
  for (double v : s.values()) total += v;
  CHECK(std::abs(total - 1.0) < 1e-15);
  const Tensor l = logsumexp_rows(Tensor::matrix({{1000.0}, {1000.0}}));
  CHECK(l.at(0) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("relu derivative at zero is zero") {
  const Tensor x = Tensor::vector({0.0, 1.0, -1.0}, true);
  backward(sum(relu(x)));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 1.0);
  CHECK(x.grad()[2] == 0.0);
}

TEST_CASE("gradients accumulate until zero_grad") {
  Tensor x = Tensor::vector({1.0, 2.0}, true);
  backward(sum(mul(x, x)));
  backward(sum(mul(x, x)));
  CHECK(x.grad()[0] == 4.0);
  CHECK(x.grad()[1] == 8.0);
  x.zero_grad();
  CHECK((!x.has_grad() || x.grad()[0] == 0.0));
}

TEST_CASE("reused node receives the sum of both paths") {
  const Tensor x = Tensor::scalar(3.0, true);
  const Tensor y = add(mul(x, x), scale(x, 2.0));
  backward(y);
  CHECK(x.grad()[0] == 8.0);
}

TEST_CASE("no-grad guard records no history") {
  const Tensor x = Tensor::vector({1.0, 2.0}, true);
  {
    NoGradGuard guard;
    CHECK_FALSE(grad_mode_enabled());
    const Tensor y = sum(mul(x, x));
    CHECK_FALSE(y.requires_grad());
    CHECK(trace(y).size() <= 1);
  }
  CHECK(grad_mode_enabled());
}

TEST_CASE("trace is in creation order") {
  const Tensor a = Tensor::vector({1.0, 2.0}, true);
  const Tensor b = Tensor::vector({3.0, 4.0}, true);
  const Tensor c = mul(a, b);
  const Tensor d = add(c, a);
  const Tensor e = sum(d);
  const auto records = trace(e);
  std::set<std::uint64_t> seen;
  for (const auto& r : records) {
    for (auto in : r.inputs) CHECK(seen.count(in) == 1);
    seen.insert(r.output);
  }
  CHECK(records.back().output == e.id());
  CHECK(c.id() < d.id());
  CHECK(d.id() < e.id());
}

TEST_CASE("backward requires a scalar") {
  const Tensor x = Tensor::vector({1.0, 2.0}, true);
  CHECK_THROWS(backward(mul(x, x)));
}

TEST_CASE("detach and clone cut history") {
  const Tensor x = Tensor::vector({1.0, 2.0}, true);
  const Tensor y = scale(x, 2.0);
  const Tensor d = y.detach();
  CHECK_FALSE(d.requires_grad());
  CHECK(d.at(1) == 4.0);
  const Tensor c = y.clone(true);
  backward(sum(c));
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("masked column mean of an empty column is zero") {
  const Tensor x = Tensor::matrix({{1, 2}, {3, 4}}, true);
  const std::vector<std::uint8_t> mask = {1, 0, 1, 0};
  const Tensor m = masked_column_mean(x, mask);
  CHECK(m.at(0) == 2.0);
  CHECK(m.at(1) == 0.0);
  backward(sum(m));
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[0] == 0.5);
}

TEST_CASE("interleave rows layout") {
  const Tensor a = Tensor::matrix({{1}, {2}});
  const Tensor b = Tensor::matrix({{10}, {20}, {30}, {40}});
  const Tensor c = interleave_rows(a, 1, b, 2);
  const std::vector<double> want = {1, 10, 20, 2, 30, 40};
  CHECK(std::vector<double>(c.values().begin(), c.values().end()) == want);
}

}  // namespace
}  // namespace memre
