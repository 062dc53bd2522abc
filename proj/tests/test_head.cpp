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

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "memre/errors.hpp"
#include "memre/head.hpp"

namespace memre {
namespace {

using testing::random_tensor;

TEST_CASE("group bilinear logits match the explicit sum") {
  Rng rng(3);
  const std::size_t d = 8, k = 4, R = 3, P = 5;
  BilinearHead head = init_bilinear_head(d, k, R, rng);
  head.blocks = random_tensor(head.blocks.shape(), rng, 1.0, false);
  const Tensor h = random_tensor({P, d}, rng, 1.0, false);
  const Tensor t = random_tensor({P, d}, rng, 1.0, false);
  const Tensor logits = group_bilinear_logits(h, t, head);
  const std::size_t g = d / k;
  const auto b = head.blocks.values();
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t c = 0; c <= R; ++c) {
      double want = 0.0;
      for (std::size_t gi = 0; gi < k; ++gi) {
        for (std::size_t i = 0; i < g; ++i) {
          for (std::size_t j = 0; j < g; ++j) {
            want += h.at(p, gi * g + i) * b[((c * k + gi) * g + i) * g + j] *
                    t.at(p, gi * g + j);
          }
        }
      }
      CHECK(std::abs(logits.at(p, c) - want) < 1e-12);
    }
  }
}

TEST_CASE("grouping divides the per-class parameter count") {
  Rng rng(1);
  const BilinearHead head = init_bilinear_head(64, 4, 3, rng);
  CHECK(head.parameters_per_class() == 64 * 64 / 4);
  CHECK(head.blocks.numel() == 4 * head.parameters_per_class());
  CHECK_THROWS_AS(init_bilinear_head(64, 3, 3, rng), ConfigError);
}

TEST_CASE("class scores subtract the threshold logit") {
  const Tensor logits = Tensor::matrix({{0.5, 1.0, 0.5, -2.0}});
  const Tensor f = class_scores(logits);
  CHECK(f.at(0, 0) == 0.5);
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(0, 2) == -2.5);
}

TEST_CASE("decode agrees with a brute-force threshold on random scores") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t R = 1 + rng.below(12);
    std::vector<double> scores(R);
    for (auto& s : scores) {
      s = rng.bernoulli(0.1) ? 0.0 : rng.uniform(-2.0, 2.0);
    }
    CHECK(decode(scores) == testing::oracle_decode(scores));
  }
}

TEST_CASE("a tie with the threshold is not predicted") {
  const std::vector<double> scores = {0.0, -0.0, 1e-300};
  CHECK(decode(scores) == std::vector<std::size_t>{3});
}

}  // namespace
}  // namespace memre
