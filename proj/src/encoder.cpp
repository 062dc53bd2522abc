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

#include "memre/encoder.hpp"

#include <cmath>
#include <string>

#include "memre/errors.hpp"

namespace memre {
namespace {

Tensor normal_param(Shape shape, double stddev, Rng& rng) {
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = rng.normal(0.0, stddev);
  return Tensor::from(std::move(shape), std::move(values), true);
}

std::string layer_name(std::size_t layer, const std::string& leaf) {
  return "encoder.layer." + std::to_string(layer) + "." + leaf;
}

Tensor self_attention(const Tensor& x, const EncoderConfig& cfg,
                      const ParameterStore& params, std::size_t layer) {
  const std::size_t head_dim = cfg.dim / cfg.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor out;
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const auto suffix = "." + std::to_string(h);
    const Tensor q = matmul(x, params.get(layer_name(layer, "wq" + suffix)));
    const Tensor k = matmul(x, params.get(layer_name(layer, "wk" + suffix)));
    const Tensor v = matmul(x, params.get(layer_name(layer, "wv" + suffix)));
    const Tensor attn = row_softmax(scale(matmul(q, transpose(k)), inv_sqrt));
    const Tensor head =
        matmul(matmul(attn, v), params.get(layer_name(layer, "wo" + suffix)));
    out = out.defined() ? add(out, head) : head;
  }
  return out;
}

}  // namespace

void validate_encoder_config(const EncoderConfig& cfg, std::size_t groups) {
  if (cfg.dim == 0) throw ConfigError("encoder: dim must be positive");
  if (cfg.vocab_size == 0) throw ConfigError("encoder: empty vocabulary");
  if (cfg.layers > 2) throw ConfigError("encoder: at most 2 attention layers");
  if (cfg.heads == 0 || cfg.dim % cfg.heads != 0) {
    throw ConfigError("encoder: dim " + std::to_string(cfg.dim) +
                      " not divisible by heads " + std::to_string(cfg.heads));
  }
  if (groups == 0 || cfg.dim % groups != 0) {
    throw ConfigError("encoder: dim " + std::to_string(cfg.dim) +
                      " not divisible by groups " + std::to_string(groups));
  }
  if (cfg.max_length == 0) throw ConfigError("encoder: max_length is 0");
}

void init_encoder_params(const EncoderConfig& cfg, ParameterStore& params,
                         Rng& rng) {
  const std::size_t d = cfg.dim;
  params.add("encoder.embed", normal_param({cfg.vocab_size, d}, 1.0, rng));
  if (cfg.layers == 0) return;
  params.add("encoder.pos", normal_param({cfg.max_length, d}, 0.02, rng));
  const std::size_t head_dim = d / cfg.heads;
  const double in_std = 1.0 / std::sqrt(static_cast<double>(d));
  const double out_std = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      const auto suffix = "." + std::to_string(h);
      params.add(layer_name(l, "wq" + suffix),
                 normal_param({d, head_dim}, in_std, rng));
      params.add(layer_name(l, "wk" + suffix),
                 normal_param({d, head_dim}, in_std, rng));
      params.add(layer_name(l, "wv" + suffix),
                 normal_param({d, head_dim}, in_std, rng));
      params.add(layer_name(l, "wo" + suffix),
                 normal_param({head_dim, d}, out_std / cfg.heads, rng));
    }
    params.add(layer_name(l, "ffn.w1"), normal_param({d, d}, in_std, rng));
    params.add(layer_name(l, "ffn.b1"), Tensor::zeros({d}, true));
    params.add(layer_name(l, "ffn.w2"), normal_param({d, d}, in_std, rng));
    params.add(layer_name(l, "ffn.b2"), Tensor::zeros({d}, true));
  }
}

EncodedDocument encode_document(std::span<const std::size_t> token_ids,
                                const EncoderConfig& cfg,
                                const ParameterStore& params) {
  EncodedDocument result;
  if (token_ids.empty()) throw InputError("encode_document: empty document");
  for (auto id : token_ids) {
    if (id >= cfg.vocab_size) {
      throw InputError("encode_document: token id " + std::to_string(id) +
                       " outside vocabulary of " +
                       std::to_string(cfg.vocab_size));
    }
  }
  if (token_ids.size() > cfg.max_length) {
    token_ids = token_ids.first(cfg.max_length);
    result.truncated = true;
  }
  Tensor x = gather_rows(params.get("encoder.embed"), token_ids);
  if (cfg.layers > 0) {
    std::vector<std::size_t> positions(token_ids.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    x = add(x, gather_rows(params.get("encoder.pos"), positions));
  }
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    x = layer_norm(add(x, self_attention(x, cfg, params, l)));
    const Tensor hidden = tanh(affine(x, params.get(layer_name(l, "ffn.w1")),
                                      params.get(layer_name(l, "ffn.b1"))));
    x = layer_norm(add(x, affine(hidden, params.get(layer_name(l, "ffn.w2")),
                                 params.get(layer_name(l, "ffn.b2")))));
  }
  result.tokens = x;
  return result;
}

EntityEmbedding pool_entity(const Tensor& token_embeddings,
                            std::span<const TokenSpan> mentions,
                            std::size_t entity_index) {
  if (mentions.empty()) {
    throw PreconditionError("pool_entity: entity " +
                            std::to_string(entity_index) + " has no mentions");
  }
  const std::size_t length = token_embeddings.rows();
  std::vector<std::size_t> first_tokens;
  first_tokens.reserve(mentions.size());
  for (const auto& span : mentions) {
    if (span.start >= span.end || span.end > length) {
      throw PreconditionError(
          "pool_entity: span [" + std::to_string(span.start) + "," +
          std::to_string(span.end) + ") outside " + std::to_string(length) +
          " tokens");
    }
    first_tokens.push_back(span.start);
  }
  EntityEmbedding out;
  out.vector = logsumexp_rows(gather_rows(token_embeddings, first_tokens));
  out.entity = entity_index;
  out.mentions_used = first_tokens.size();
  return out;
}

Tensor entity_pair_inputs(const EntityEmbedding& head,
                          const EntityEmbedding& tail) {
  if (head.vector.numel() != tail.vector.numel()) {
    throw DimensionError("entity_pair_inputs: head dim " +
                         std::to_string(head.vector.numel()) +
                         " vs tail dim " +
                         std::to_string(tail.vector.numel()));
  }
  return concat_rows(head.vector, tail.vector);
}

}  // namespace memre
