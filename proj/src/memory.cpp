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

#include "memre/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "memre/errors.hpp"

namespace memre {
namespace {

std::string read_name(std::size_t layer, const char* leaf) {
  return "memory.read." + std::to_string(layer) + "." + leaf;
}

std::vector<std::size_t> iota_index(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> index(end - begin);
  std::iota(index.begin(), index.end(), begin);
  return index;
}

}  // namespace

void validate_read_config(const ReadConfig& cfg) {
  if (cfg.read_layers < 1 || cfg.read_layers > 4) {
    throw ConfigError("read_layers must be in 1..4, got " +
                      std::to_string(cfg.read_layers));
  }
}

MemoryState init_memory(std::size_t m, std::size_t d, std::uint64_t seed) {
  if (m == 0 || d == 0) throw PreconditionError("init_memory: m, d >= 1");
  Rng rng(seed);
  std::vector<double> values(m * d);
  for (auto& v : values) v = rng.normal(0.0, kMemoryInitStd);
  MemoryState state;
  state.tokens = Tensor::from({m, d}, std::move(values), true);
  state.positions = Tensor::zeros({m + kPairInputs, d}, true);
  return state;
}

SummarizerParams init_summarizer(std::size_t d, std::size_t hidden, Rng& rng) {
  if (hidden == 0) hidden = d;
  SummarizerParams p = zero_summarizer(d, hidden);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& v : p.w1.mutable_values()) v = rng.normal(0.0, stddev);
  return p;
}

SummarizerParams zero_summarizer(std::size_t d, std::size_t hidden) {
  if (hidden == 0) hidden = d;
  return {Tensor::zeros({d, hidden}, true), Tensor::zeros({hidden}, true),
          Tensor::zeros({hidden, kReadOutputs}, true),
          Tensor::zeros({kReadOutputs}, true)};
}

Tensor importance_scores(const Tensor& values, const SummarizerParams& mlp) {
  return affine(tanh(affine(values, mlp.w1, mlp.b1)), mlp.w2, mlp.b2);
}

ReadOutput summarize(const Tensor& values, const SummarizerParams& mlp) {
  detail::require_2d(values, "summarize");
  if (values.rows() < kReadOutputs) {
    throw PreconditionError("summarize: need at least " +
                            std::to_string(kReadOutputs) + " rows, got " +
                            std::to_string(values.rows()));
  }
  const Tensor weights =
      row_softmax(transpose(importance_scores(values, mlp)));
  return {matmul(weights, values), weights};
}

ReadOutput read(const MemoryState& memory, const Tensor& inputs,
                std::span<const SummarizerParams> layers) {
  if (layers.empty()) throw ConfigError("read: no read layers");
  if (inputs.ndim() != 2 || inputs.rows() != kPairInputs ||
      inputs.cols() != memory.dim()) {
    throw DimensionError("read: inputs " + shape_string(inputs.shape()) +
                         " vs memory dim " + std::to_string(memory.dim()));
  }
  const Tensor stacked =
      add(concat_rows(memory.tokens, inputs), memory.positions);
  ReadOutput out = summarize(stacked, layers[0]);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    out = summarize(concat_rows(stacked, out.summary), layers[l]);
  }
  return out;
}

Tensor read_batch(const MemoryState& memory, const Tensor& inputs,
                  std::span<const SummarizerParams> layers) {
  if (layers.empty()) throw ConfigError("read_batch: no read layers");
  const std::size_t m = memory.size();
  if (inputs.ndim() != 2 || inputs.cols() != memory.dim() ||
      inputs.rows() % kPairInputs != 0) {
    throw DimensionError("read_batch: inputs " + shape_string(inputs.shape()));
  }
  const auto prefix_index = iota_index(0, m);
  const auto input_index = iota_index(m, m + kPairInputs);
  const Tensor prefix =
      add(memory.tokens, gather_rows(memory.positions, prefix_index));
  const Tensor pair_rows =
      add_tiled_rows(inputs, gather_rows(memory.positions, input_index));

  Tensor summary = shared_prefix_pool(
      prefix, importance_scores(prefix, layers[0]), pair_rows,
      importance_scores(pair_rows, layers[0]), kPairInputs);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const Tensor suffix =
        interleave_rows(pair_rows, kPairInputs, summary, kReadOutputs);
    summary = shared_prefix_pool(
        prefix, importance_scores(prefix, layers[l]), suffix,
        importance_scores(suffix, layers[l]), kPairInputs + kReadOutputs);
  }
  return summary;
}

Tensor shared_prefix_pool(const Tensor& prefix_values,
                          const Tensor& prefix_scores,
                          const Tensor& suffix_values,
                          const Tensor& suffix_scores, std::size_t suffix_rows,
                          std::vector<double>* weights_out) {
  detail::require_2d(prefix_values, "shared_prefix_pool");
  detail::require_2d(suffix_values, "shared_prefix_pool");
  const std::size_t m = prefix_values.shape()[0];
  const std::size_t d = prefix_values.shape()[1];
  const std::size_t r = prefix_scores.cols();
  const std::size_t q = suffix_rows;
  if (q == 0 || suffix_values.cols() != d ||
      suffix_values.rows() % q != 0 || prefix_scores.rows() != m ||
      suffix_scores.rows() != suffix_values.rows() ||
      suffix_scores.cols() != r) {
    throw DimensionError("shared_prefix_pool: inconsistent operand shapes");
  }
  const std::size_t pairs = suffix_values.rows() / q;
  const auto vm = prefix_values.values();
  const auto sm = prefix_scores.values();
  const auto vq = suffix_values.values();
  const auto sq = suffix_scores.values();

  // Prefix aggregates, shifted by the per-output prefix max.
  std::vector<double> prefix_max(r, -std::numeric_limits<double>::infinity());
  std::vector<double> prefix_exp(m * r);
  std::vector<double> prefix_mass(r, 0.0);
  std::vector<double> prefix_sum(r * d, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < r; ++i)
      prefix_max[i] = std::max(prefix_max[i], sm[j * r + i]);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < r; ++i) {
      const double e = std::exp(sm[j * r + i] - prefix_max[i]);
      prefix_exp[j * r + i] = e;
      prefix_mass[i] += e;
      double* acc = prefix_sum.data() + i * d;
      const double* v = vm.data() + j * d;
      for (std::size_t c = 0; c < d; ++c) acc[c] += e * v[c];
    }
  }

  std::vector<double> out(pairs * r * d, 0.0);
  std::vector<double> prefix_share(pairs * r, 0.0);  // weight per prefix e
  std::vector<double> suffix_weight(pairs * q * r, 0.0);
  for (std::size_t b = 0; b < pairs; ++b) {
    for (std::size_t i = 0; i < r; ++i) {
      double shift = prefix_max[i];
      for (std::size_t s = 0; s < q; ++s)
        shift = std::max(shift, sq[(b * q + s) * r + i]);
      const double prefix_scale =
          m > 0 ? std::exp(prefix_max[i] - shift) : 0.0;
      double norm = prefix_scale * prefix_mass[i];
      for (std::size_t s = 0; s < q; ++s) {
        const double e = std::exp(sq[(b * q + s) * r + i] - shift);
        suffix_weight[(b * q + s) * r + i] = e;
        norm += e;
      }
      double* z = out.data() + (b * r + i) * d;
      const double share = prefix_scale / norm;
      prefix_share[b * r + i] = share;
      const double* agg = prefix_sum.data() + i * d;
      for (std::size_t c = 0; c < d; ++c) z[c] = share * agg[c];
      for (std::size_t s = 0; s < q; ++s) {
        double& w = suffix_weight[(b * q + s) * r + i];
        w /= norm;
        const double* v = vq.data() + (b * q + s) * d;
        for (std::size_t c = 0; c < d; ++c) z[c] += w * v[c];
      }
    }
  }

  if (weights_out) {
    weights_out->assign(pairs * r * (m + q), 0.0);
    for (std::size_t b = 0; b < pairs; ++b)
      for (std::size_t i = 0; i < r; ++i) {
        double* row = weights_out->data() + (b * r + i) * (m + q);
        for (std::size_t j = 0; j < m; ++j)
          row[j] = prefix_exp[j * r + i] * prefix_share[b * r + i];
        for (std::size_t s = 0; s < q; ++s)
          row[m + s] = suffix_weight[(b * q + s) * r + i];
      }
  }

  return detail::make_result(
      "shared_prefix_pool", {pairs * r, d}, std::move(out),
      {prefix_values, prefix_scores, suffix_values, suffix_scores},
      [m, d, r, q, pairs, prefix_exp = std::move(prefix_exp),
       prefix_share = std::move(prefix_share),
       suffix_weight = std::move(suffix_weight)](detail::Node& self) {
        auto& vm_node = *self.inputs[0];
        auto& sm_node = *self.inputs[1];
        auto& vq_node = *self.inputs[2];
        auto& sq_node = *self.inputs[3];
        const bool need_prefix = vm_node.requires_grad || sm_node.requires_grad;
        std::vector<double> g_vec(r * d, 0.0);  // sum_b share * dz
        std::vector<double> g_dot(r, 0.0);      // sum_b share * (dz . z)
        for (std::size_t b = 0; b < pairs; ++b) {
          for (std::size_t i = 0; i < r; ++i) {
            const double* dz = self.grad.data() + (b * r + i) * d;
            const double* z = self.value.data() + (b * r + i) * d;
            double dzz = 0.0;
            for (std::size_t c = 0; c < d; ++c) dzz += dz[c] * z[c];
            if (need_prefix) {
              const double share = prefix_share[b * r + i];
              double* gv = g_vec.data() + i * d;
              for (std::size_t c = 0; c < d; ++c) gv[c] += share * dz[c];
              g_dot[i] += share * dzz;
            }
            for (std::size_t s = 0; s < q; ++s) {
              const std::size_t row = b * q + s;
              const double w = suffix_weight[row * r + i];
              const double* v = vq_node.value.data() + row * d;
              if (sq_node.requires_grad) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += dz[c] * v[c];
                sq_node.grad_buffer()[row * r + i] += w * (dot - dzz);
              }
              if (vq_node.requires_grad) {
                double* gv = vq_node.grad_buffer().data() + row * d;
                for (std::size_t c = 0; c < d; ++c) gv[c] += w * dz[c];
              }
            }
          }
        }
        if (!need_prefix) return;
        for (std::size_t j = 0; j < m; ++j) {
          const double* v = vm_node.value.data() + j * d;
          for (std::size_t i = 0; i < r; ++i) {
            const double e = prefix_exp[j * r + i];
            const double* gv = g_vec.data() + i * d;
            if (sm_node.requires_grad) {
              double dot = 0.0;
              for (std::size_t c = 0; c < d; ++c) dot += gv[c] * v[c];
              sm_node.grad_buffer()[j * r + i] += e * (dot - g_dot[i]);
            }
            if (vm_node.requires_grad) {
              double* g = vm_node.grad_buffer().data() + j * d;
              for (std::size_t c = 0; c < d; ++c) g[c] += e * gv[c];
            }
          }
        }
      });
}

void register_memory(ParameterStore& params, const MemoryState& memory,
                     std::span<const SummarizerParams> layers) {
  params.add("memory.M", memory.tokens);
  params.add("memory.pos", memory.positions);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    params.add(read_name(l, "w1"), layers[l].w1);
    params.add(read_name(l, "b1"), layers[l].b1);
    params.add(read_name(l, "w2"), layers[l].w2);
    params.add(read_name(l, "b2"), layers[l].b2);
  }
}

MemoryState memory_from_store(const ParameterStore& params) {
  MemoryState state;
  state.tokens = params.get("memory.M");
  state.positions = params.get("memory.pos");
  return state;
}

std::vector<SummarizerParams> read_layers_from_store(
    const ParameterStore& params, std::size_t read_layers) {
  std::vector<SummarizerParams> layers;
  for (std::size_t l = 0; l < read_layers; ++l) {
    layers.push_back({params.get(read_name(l, "w1")),
                      params.get(read_name(l, "b1")),
                      params.get(read_name(l, "w2")),
                      params.get(read_name(l, "b2"))});
  }
  return layers;
}

bool is_memory_token_param(const std::string& name) {
  return name == "memory.M" || name == "memory.pos";
}

}  // namespace memre
