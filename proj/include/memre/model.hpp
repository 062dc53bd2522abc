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

#ifndef MEMRE_MODEL_HPP_
#define MEMRE_MODEL_HPP_

// The full pair scorer: encoder -> entity pooling -> memory read -> group
// bilinear head -> per-class scores against the threshold class.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "memre/checkpoint.hpp"
#include "memre/data.hpp"
#include "memre/encoder.hpp"
#include "memre/head.hpp"
#include "memre/memory.hpp"

namespace memre {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t relations = 0;
  std::size_t dim = 64;
  std::size_t encoder_layers = 0;
  std::size_t heads = 2;
  std::size_t max_length = 512;
  std::size_t memory_size = 200;  // 0 bypasses the memory read (Z = I)
  std::size_t read_layers = 4;
  std::size_t read_hidden = 0;    // 0 means dim
  std::size_t groups = 4;
  std::uint64_t seed = 1;

  bool bypass() const { return memory_size == 0; }
  EncoderConfig encoder() const;
  ReadConfig read() const;
};

void validate_model_config(const ModelConfig& cfg);

// Checkpoint meta round-trip for the config.
std::map<std::string, std::string> model_meta(const ModelConfig& cfg);
ModelConfig model_config_from_meta(const std::map<std::string, std::string>& meta);

struct Model {
  ModelConfig config;
  ParameterStore params;  // head blocks live under "head.blocks"

  BilinearHead head() const;
  MemoryState memory() const;
  std::vector<SummarizerParams> read_params() const;
};

Model init_model(const ModelConfig& cfg);

// Checkpoints store the head as one [g x g] tensor per class and group,
// named head.class{c}.group{i}.
void save_model(const std::filesystem::path& path, const Model& model,
                std::map<std::string, std::string> extra_meta = {});
Model load_model(const std::filesystem::path& path,
                 std::map<std::string, std::string>* meta_out = nullptr);

// A document ready for scoring: token ids plus each entity's mention spans in
// document-global token offsets.
struct PreparedDocument {
  const Document* doc = nullptr;
  std::vector<std::size_t> token_ids;
  std::vector<std::vector<TokenSpan>> mentions;
};

PreparedDocument prepare_document(const Document& doc, const Vocabulary& vocab);

struct PairRef {
  std::size_t doc = 0;  // index into the batch
  std::size_t head = 0;
  std::size_t tail = 0;
};

struct BatchForward {
  std::vector<PairRef> pairs;
  Tensor entities;  // pooled entity vectors of every batch document, stacked
  Tensor logits;    // [P x (R+1)]
  Tensor scores;    // [P x R]
};

// Scores the given pairs, or every ordered pair of every document when
// `pairs` is empty. One encoder pass per document.
BatchForward forward_batch(const Model& model,
                           std::span<const PreparedDocument* const> docs,
                           std::vector<PairRef> pairs = {});

struct PairForward {
  Tensor logits;  // [R+1]
  Tensor scores;  // [R]
};

PairForward forward_pair(const Model& model, const PreparedDocument& doc,
                         std::size_t head, std::size_t tail);

// Pre-read entity vectors [N x d] of one document.
Tensor entity_embeddings(const Model& model, const PreparedDocument& doc);

}  // namespace memre

#endif  // MEMRE_MODEL_HPP_
