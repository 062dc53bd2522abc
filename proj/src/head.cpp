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

#include "memre/head.hpp"

#include <cmath>
#include <string>

#include "memre/errors.hpp"

namespace memre {

std::size_t BilinearHead::dim() const { return groups * group_dim(); }
std::size_t BilinearHead::group_dim() const { return blocks.shape()[2]; }
std::size_t BilinearHead::parameters_per_class() const {
  return groups * group_dim() * group_dim();
}

BilinearHead init_bilinear_head(std::size_t dim, std::size_t groups,
                                std::size_t relations, Rng& rng) {
  if (groups == 0 || dim % groups != 0) {
    throw ConfigError("group bilinear: d = " + std::to_string(dim) +
                      " not divisible by k = " + std::to_string(groups));
  }
  const std::size_t g = dim / groups;
  const std::size_t classes = relations + 1;
  std::vector<double> values(classes * groups * g * g);
  const double stddev = 1.0 / static_cast<double>(dim);
  for (auto& v : values) v = rng.normal(0.0, stddev);
  return {groups, relations,
          Tensor::from({classes, groups, g, g}, std::move(values), true)};
}

Tensor group_bilinear_logits(const Tensor& heads, const Tensor& tails,
                             const BilinearHead& head) {
  if (head.blocks.ndim() != 4) {
    throw DimensionError("group bilinear: blocks must be 4-D");
  }
  const std::size_t classes = head.blocks.shape()[0];
  const std::size_t k = head.blocks.shape()[1];
  const std::size_t g = head.blocks.shape()[2];
  const std::size_t d = k * g;
  const bool single = heads.ndim() == 1;
  if (heads.shape() != tails.shape() || heads.cols() % k != 0) {
    throw ConfigError("group bilinear: inputs " + shape_string(heads.shape()) +
                      "/" + shape_string(tails.shape()) +
                      " incompatible with k = " + std::to_string(k));
  }
  if (heads.cols() != d) {
    throw DimensionError("group bilinear: input dim " +
                         std::to_string(heads.cols()) + " vs head dim " +
                         std::to_string(d));
  }
  const std::size_t pairs = heads.rows();
  const auto hv = heads.values();
  const auto tv = tails.values();
  const auto bv = head.blocks.values();
  std::vector<double> out(pairs * classes, 0.0);
  for (std::size_t p = 0; p < pairs; ++p) {
    const double* h = hv.data() + p * d;
    const double* t = tv.data() + p * d;
    for (std::size_t c = 0; c < classes; ++c) {
      double acc = 0.0;
      for (std::size_t grp = 0; grp < k; ++grp) {
        const double* block = bv.data() + (c * k + grp) * g * g;
        const double* hg = h + grp * g;
        const double* tg = t + grp * g;
        for (std::size_t a = 0; a < g; ++a) {
          double row = 0.0;
          for (std::size_t b = 0; b < g; ++b) row += block[a * g + b] * tg[b];
          acc += hg[a] * row;
        }
      }
      out[p * classes + c] = acc;
    }
  }
  Shape shape = single ? Shape{classes} : Shape{pairs, classes};
  return detail::make_result(
      "group_bilinear", std::move(shape), std::move(out),
      {heads, tails, head.blocks},
      [pairs, classes, k, g, d](detail::Node& self) {
        auto& hn = *self.inputs[0];
        auto& tn = *self.inputs[1];
        auto& bn = *self.inputs[2];
        for (std::size_t p = 0; p < pairs; ++p) {
          const double* h = hn.value.data() + p * d;
          const double* t = tn.value.data() + p * d;
          for (std::size_t c = 0; c < classes; ++c) {
            const double go = self.grad[p * classes + c];
            if (go == 0.0) continue;
            for (std::size_t grp = 0; grp < k; ++grp) {
              const std::size_t off = (c * k + grp) * g * g;
              const double* block = bn.value.data() + off;
              const double* hg = h + grp * g;
              const double* tg = t + grp * g;
              if (hn.requires_grad) {
                double* gh = hn.grad_buffer().data() + p * d + grp * g;
                for (std::size_t a = 0; a < g; ++a) {
                  double row = 0.0;
                  for (std::size_t b = 0; b < g; ++b)
                    row += block[a * g + b] * tg[b];
                  gh[a] += go * row;
                }
              }
              if (tn.requires_grad) {
                double* gt = tn.grad_buffer().data() + p * d + grp * g;
                for (std::size_t a = 0; a < g; ++a) {
                  const double ha = go * hg[a];
                  for (std::size_t b = 0; b < g; ++b)
                    gt[b] += ha * block[a * g + b];
                }
              }
              if (bn.requires_grad) {
                double* gb = bn.grad_buffer().data() + off;
                for (std::size_t a = 0; a < g; ++a) {
                  const double ha = go * hg[a];
                  for (std::size_t b = 0; b < g; ++b) gb[a * g + b] += ha * tg[b];
                }
              }
            }
          }
        }
      });
}

Tensor class_scores(const Tensor& logits) {
  const bool single = logits.ndim() == 1;
  const std::size_t pairs = logits.rows();
  const std::size_t classes = logits.cols();
  if (classes < 1) throw DimensionError("class_scores: empty logits");
  const std::size_t relations = classes - 1;
  const auto lv = logits.values();
  std::vector<double> out(pairs * relations);
  for (std::size_t p = 0; p < pairs; ++p)
    for (std::size_t i = 0; i < relations; ++i)
      out[p * relations + i] =
          lv[p * classes + i + 1] - lv[p * classes + kThresholdClass];
  Shape shape = single ? Shape{relations} : Shape{pairs, relations};
  return detail::make_result(
      "class_scores", std::move(shape), std::move(out), {logits},
      [pairs, classes, relations](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t p = 0; p < pairs; ++p)
          for (std::size_t i = 0; i < relations; ++i) {
            const double go = self.grad[p * relations + i];
            g[p * classes + i + 1] += go;
            g[p * classes + kThresholdClass] -= go;
          }
      });
}

std::vector<std::size_t> decode(std::span<const double> scores) {
  std::vector<std::size_t> relations;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > 0.0) relations.push_back(i + 1);
  return relations;
}

}  // namespace memre
