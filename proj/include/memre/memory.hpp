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

#ifndef MEMRE_MEMORY_HPP_
#define MEMRE_MEMORY_HPP_

// Token-memory read path. Learnable memory tokens M are stacked with the
// head/tail input rows I, a learnable positional embedding is added, and a
// per-token importance MLP plus softmax summarizes the stack into r = 2 rows
// (memory-augmented head and tail).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "memre/checkpoint.hpp"
#include "memre/rng.hpp"
#include "memre/tensor.hpp"

namespace memre {

inline constexpr std::size_t kReadOutputs = 2;
inline constexpr std::size_t kPairInputs = 2;
inline constexpr double kMemoryInitStd = 0.02;

struct ReadConfig {
  std::size_t read_layers = 4;  // 1..4
  std::size_t hidden = 0;       // importance MLP width; 0 means d
};

void validate_read_config(const ReadConfig& cfg);

struct MemoryState {
  Tensor tokens;     // M [m x d]
  Tensor positions;  // [(m + 2) x d]
  bool frozen = false;

  std::size_t size() const { return tokens.rows(); }
  std::size_t dim() const { return tokens.cols(); }
};

// M ~ Normal(0, 0.02^2) i.i.d., positions zero.
MemoryState init_memory(std::size_t m, std::size_t d, std::uint64_t seed);

// One importance MLP: tanh hidden layer, linear output of r scores per row.
struct SummarizerParams {
  Tensor w1;  // [d x h]
  Tensor b1;  // [h]
  Tensor w2;  // [h x r]
  Tensor b2;  // [r]
};

// w1 ~ Normal(0, 1/d); everything else zero, so initial scores are zero and
// the first read is a uniform average.
SummarizerParams init_summarizer(std::size_t d, std::size_t hidden, Rng& rng);
SummarizerParams zero_summarizer(std::size_t d, std::size_t hidden);

// [p x d] -> [p x r] importance logits.
Tensor importance_scores(const Tensor& values, const SummarizerParams& mlp);

struct ReadOutput {
  Tensor summary;  // Z [r x d]; row 0 head, row 1 tail
  Tensor weights;  // W [r x p], rows sum to 1
};

// z_i = softmax over rows of the i-th importance score column, times V.
ReadOutput summarize(const Tensor& values, const SummarizerParams& mlp);

// Single-pair read: V = [M || I] + pos, then one summarize per layer, layer l
// reading [V || Z_{l-1}].
ReadOutput read(const MemoryState& memory, const Tensor& inputs,
                std::span<const SummarizerParams> layers);

// Batched read for P pairs; `inputs` is [(P*2) x d] with head, tail rows per
// pair. Returns Z as [(P*2) x d]. Equivalent to read() on each pair.
Tensor read_batch(const MemoryState& memory, const Tensor& inputs,
                  std::span<const SummarizerParams> layers);

// Softmax pooling over a shared prefix plus a per-pair suffix:
//   for pair b and output i, weights = softmax over
//   [prefix_scores[:, i] ; suffix_scores[b*q : (b+1)*q, i]]
//   and Z[b*r + i] = weights . [prefix_values ; suffix_values block b].
// The prefix contribution is aggregated once, so cost per pair is O(q r d).
// When `weights_out` is given it receives P blocks of [r x (m + q)] weights.
Tensor shared_prefix_pool(const Tensor& prefix_values,
                          const Tensor& prefix_scores,
                          const Tensor& suffix_values,
                          const Tensor& suffix_scores, std::size_t suffix_rows,
                          std::vector<double>* weights_out = nullptr);

// Parameter naming inside checkpoints.
void register_memory(ParameterStore& params, const MemoryState& memory,
                     std::span<const SummarizerParams> layers);
MemoryState memory_from_store(const ParameterStore& params);
std::vector<SummarizerParams> read_layers_from_store(
    const ParameterStore& params, std::size_t read_layers);
bool is_memory_token_param(const std::string& name);

}  // namespace memre

#endif  // MEMRE_MEMORY_HPP_
