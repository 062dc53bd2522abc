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

#ifndef MEMRE_HEAD_HPP_
#define MEMRE_HEAD_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "memre/rng.hpp"
#include "memre/tensor.hpp"

namespace memre {

// Index of the learned threshold class inside a logit vector.
inline constexpr std::size_t kThresholdClass = 0;

// Group bilinear classifier over R relations plus the threshold class.
// `blocks` has shape [(R+1) x k x (d/k) x (d/k)].
struct BilinearHead {
  std::size_t groups = 1;
  std::size_t relations = 0;
  Tensor blocks;

  std::size_t dim() const;
  std::size_t group_dim() const;
  // d^2 / k.
  std::size_t parameters_per_class() const;
};

BilinearHead init_bilinear_head(std::size_t dim, std::size_t groups,
                                std::size_t relations, Rng& rng);

// logits[p, c] = sum_g heads[p, g] B[c, g] tails[p, g]  over chunk g of size
// d/k. heads/tails are [P x d] (or [d] for a single pair). Returns
// [P x (R+1)] (or [R+1]).
Tensor group_bilinear_logits(const Tensor& heads, const Tensor& tails,
                             const BilinearHead& head);

// f[p, i] = logits[p, i+1] - logits[p, TH] for i = 0..R-1.
Tensor class_scores(const Tensor& logits);

// Relation ids (1-based) with f_i > 0, ascending. Ties are not predicted.
std::vector<std::size_t> decode(std::span<const double> scores);

}  // namespace memre

#endif  // MEMRE_HEAD_HPP_
