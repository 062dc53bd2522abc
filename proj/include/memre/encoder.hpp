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

#ifndef MEMRE_ENCODER_HPP_
#define MEMRE_ENCODER_HPP_

// Small trainable document encoder: a token embedding table followed by up to
// two post-norm self-attention blocks, plus entity pooling over mentions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "memre/checkpoint.hpp"
#include "memre/rng.hpp"
#include "memre/tensor.hpp"

namespace memre {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
  std::size_t layers = 0;  // 0, 1 or 2 attention blocks
  std::size_t heads = 2;
  std::size_t max_length = 512;
  std::uint64_t seed = 1;
};

// Throws ConfigError unless dim is divisible by heads and by `groups`.
void validate_encoder_config(const EncoderConfig& cfg, std::size_t groups);

// Registers encoder.* parameters.
void init_encoder_params(const EncoderConfig& cfg, ParameterStore& params,
                         Rng& rng);

struct EncodedDocument {
  Tensor tokens;  // [T x d]
  bool truncated = false;
};

EncodedDocument encode_document(std::span<const std::size_t> token_ids,
                                const EncoderConfig& cfg,
                                const ParameterStore& params);

// Half-open token range in document-global offsets.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

struct EntityEmbedding {
  Tensor vector;  // [d]
  std::size_t entity = 0;
  std::size_t mentions_used = 0;
};

// Dimension-wise logsumexp over the first-token embedding of every mention.
EntityEmbedding pool_entity(const Tensor& token_embeddings,
                            std::span<const TokenSpan> mentions,
                            std::size_t entity_index = 0);

// [2 x d]: row 0 head, row 1 tail.
Tensor entity_pair_inputs(const EntityEmbedding& head,
                          const EntityEmbedding& tail);

}  // namespace memre

#endif  // MEMRE_ENCODER_HPP_
