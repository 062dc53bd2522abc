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

#include "memre/model.hpp"

#include <algorithm>
#include <utility>

#include "memre/errors.hpp"

namespace memre {
namespace {

constexpr const char* kHeadBlocks = "head.blocks";

std::string head_block_name(std::size_t c, std::size_t g) {
  return "head.class" + std::to_string(c) + ".group" + std::to_string(g);
}

std::size_t meta_size(const std::map<std::string, std::string>& meta,
                      const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("checkpoint meta lacks " + key);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw ParseError("checkpoint meta " + key + " is not an integer: " +
                     it->second);
  }
}

}  // namespace

EncoderConfig ModelConfig::encoder() const {
  EncoderConfig enc;
  enc.vocab_size = vocab_size;
  enc.dim = dim;
  enc.layers = encoder_layers;
  enc.heads = heads;
  enc.max_length = max_length;
  enc.seed = seed;
  return enc;
}

ReadConfig ModelConfig::read() const {
  ReadConfig cfg;
  cfg.read_layers = read_layers;
  cfg.hidden = read_hidden;
  return cfg;
}

void validate_model_config(const ModelConfig& cfg) {
  if (cfg.vocab_size == 0) throw ConfigError("model: empty vocabulary");
  if (cfg.relations == 0) throw ConfigError("model: no relation classes");
  if (cfg.dim == 0) throw ConfigError("model: dim must be positive");
  if (cfg.encoder_layers > 2) {
    throw ConfigError("model: encoder_layers must be 0, 1 or 2");
  }
  validate_encoder_config(cfg.encoder(), cfg.groups);
  if (!cfg.bypass()) validate_read_config(cfg.read());
}

std::map<std::string, std::string> model_meta(const ModelConfig& cfg) {
  return {{"model.vocab_size", std::to_string(cfg.vocab_size)},
          {"model.relations", std::to_string(cfg.relations)},
          {"model.dim", std::to_string(cfg.dim)},
          {"model.encoder_layers", std::to_string(cfg.encoder_layers)},
          {"model.heads", std::to_string(cfg.heads)},
          {"model.max_length", std::to_string(cfg.max_length)},
          {"model.memory_size", std::to_string(cfg.memory_size)},
          {"model.read_layers", std::to_string(cfg.read_layers)},
          {"model.read_hidden", std::to_string(cfg.read_hidden)},
          {"model.groups", std::to_string(cfg.groups)},
          {"model.seed", std::to_string(cfg.seed)}};
}

ModelConfig model_config_from_meta(
    const std::map<std::string, std::string>& meta) {
  ModelConfig cfg;
  cfg.vocab_size = meta_size(meta, "model.vocab_size");
  cfg.relations = meta_size(meta, "model.relations");
  cfg.dim = meta_size(meta, "model.dim");
  cfg.encoder_layers = meta_size(meta, "model.encoder_layers");
  cfg.heads = meta_size(meta, "model.heads");
  cfg.max_length = meta_size(meta, "model.max_length");
  cfg.memory_size = meta_size(meta, "model.memory_size");
  cfg.read_layers = meta_size(meta, "model.read_layers");
  cfg.read_hidden = meta_size(meta, "model.read_hidden");
  cfg.groups = meta_size(meta, "model.groups");
  cfg.seed = meta_size(meta, "model.seed");
  return cfg;
}

BilinearHead Model::head() const {
  return {config.groups, config.relations, params.get(kHeadBlocks)};
}

MemoryState Model::memory() const { return memory_from_store(params); }

std::vector<SummarizerParams> Model::read_params() const {
  return read_layers_from_store(params, config.read_layers);
}

Model init_model(const ModelConfig& cfg) {
  validate_model_config(cfg);
  Model model;
  model.config = cfg;
  Rng rng(Rng::mix(cfg.seed, 0));
  init_encoder_params(cfg.encoder(), model.params, rng);
  if (!cfg.bypass()) {
    const MemoryState memory =
        init_memory(cfg.memory_size, cfg.dim, Rng::mix(cfg.seed, 1));
    Rng read_rng(Rng::mix(cfg.seed, 2));
    std::vector<SummarizerParams> layers;
    for (std::size_t l = 0; l < cfg.read_layers; ++l) {
      layers.push_back(init_summarizer(cfg.dim, cfg.read_hidden, read_rng));
    }
    register_memory(model.params, memory, layers);
  }
  Rng head_rng(Rng::mix(cfg.seed, 3));
  model.params.add(kHeadBlocks,
                   init_bilinear_head(cfg.dim, cfg.groups, cfg.relations,
                                      head_rng)
                       .blocks);
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model,
                std::map<std::string, std::string> extra_meta) {
  auto meta = model_meta(model.config);
  for (auto& [k, v] : extra_meta) meta[k] = std::move(v);
  ParameterStore out;
  for (const auto& [name, tensor] : model.params.entries()) {
    if (name != kHeadBlocks) {
      out.add(name, tensor);
      continue;
    }
    const auto& shape = tensor.shape();
    const std::size_t classes = shape[0], k = shape[1], g = shape[2];
    const auto values = tensor.values();
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < k; ++i) {
        const auto* begin = values.data() + (c * k + i) * g * g;
        out.add(head_block_name(c, i),
                Tensor::from({g, g}, std::vector<double>(begin, begin + g * g)));
      }
    }
  }
  save_checkpoint(path, meta, out);
}

Model load_model(const std::filesystem::path& path,
                 std::map<std::string, std::string>* meta_out) {
  Checkpoint ckpt = load_checkpoint(path);
  Model model;
  model.config = model_config_from_meta(ckpt.meta);
  validate_model_config(model.config);
  const std::size_t classes = model.config.relations + 1;
  const std::size_t k = model.config.groups;
  const std::size_t g = model.config.dim / k;
  std::vector<double> blocks(classes * k * g * g);
  bool head_seen = false;
  for (const auto& [name, tensor] : ckpt.params.entries()) {
    if (name.rfind("head.class", 0) != 0) {
      model.params.add(name, tensor.clone(true));
      continue;
    }
    if (!head_seen) {
      // Reserve the slot so parameter order matches init_model().
      head_seen = true;
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < k; ++i) {
          const std::string block = head_block_name(c, i);
          if (!ckpt.params.contains(block)) {
            throw ParseError(path.string() + ": missing " + block);
          }
          const Tensor& t = ckpt.params.get(block);
          if (t.shape() != Shape{g, g}) {
            throw ParseError(path.string() + ": " + block + " has shape " +
                             shape_string(t.shape()));
          }
          std::copy(t.values().begin(), t.values().end(),
                    blocks.begin() + static_cast<std::ptrdiff_t>(
                                         (c * k + i) * g * g));
        }
      }
      model.params.add(kHeadBlocks,
                       Tensor::from({classes, k, g, g}, blocks, true));
    }
  }
  if (!head_seen) throw ParseError(path.string() + ": no head parameters");
  // Shape-check everything else against a fresh init.
  const Model reference = init_model(model.config);
  for (const auto& [name, tensor] : reference.params.entries()) {
    if (!model.params.contains(name)) {
      throw ParseError(path.string() + ": missing parameter " + name);
    }
    if (model.params.get(name).shape() != tensor.shape()) {
      throw ParseError(path.string() + ": parameter " + name + " has shape " +
                       shape_string(model.params.get(name).shape()) +
                       ", expected " + shape_string(tensor.shape()));
    }
  }
  if (reference.params.size() != model.params.size()) {
    throw ParseError(path.string() + ": unexpected extra parameters");
  }
  if (meta_out) *meta_out = std::move(ckpt.meta);
  return model;
}

PreparedDocument prepare_document(const Document& doc,
                                  const Vocabulary& vocab) {
  PreparedDocument out;
  out.doc = &doc;
  out.token_ids = vocab.encode(doc);
  out.mentions.resize(doc.entity_count());
  for (std::size_t e = 0; e < doc.entity_count(); ++e) {
    for (const auto& m : doc.entities[e]) {
      const std::size_t base = doc.sentence_offset(m.sentence);
      out.mentions[e].push_back({base + m.start, base + m.end});
    }
  }
  return out;
}

Tensor entity_embeddings(const Model& model, const PreparedDocument& doc) {
  const EncodedDocument enc =
      encode_document(doc.token_ids, model.config.encoder(), model.params);
  const std::size_t length = enc.tokens.rows();
  std::vector<Tensor> rows;
  rows.reserve(doc.mentions.size());
  for (std::size_t e = 0; e < doc.mentions.size(); ++e) {
    std::vector<TokenSpan> spans;
    for (const auto& s : doc.mentions[e]) {
      if (s.start < length) spans.push_back({s.start, std::min(s.end, length)});
    }
    // Every mention fell past the truncation point: fall back to the last
    // kept token so the entity still gets a vector.
    if (spans.empty() && !doc.mentions[e].empty()) {
      spans.push_back({length - 1, length});
    }
    rows.push_back(pool_entity(enc.tokens, spans, e).vector);
  }
  if (rows.empty()) {
    return Tensor::zeros({0, model.config.dim});
  }
  return concat_rows(std::span<const Tensor>(rows));
}

BatchForward forward_batch(const Model& model,
                           std::span<const PreparedDocument* const> docs,
                           std::vector<PairRef> pairs) {
  BatchForward out;
  std::vector<Tensor> blocks;
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const PreparedDocument* doc : docs) {
    offset.push_back(total);
    const Tensor e = entity_embeddings(model, *doc);
    total += e.rows();
    if (e.rows() > 0) blocks.push_back(e);
  }
  if (pairs.empty()) {
    for (std::size_t b = 0; b < docs.size(); ++b) {
      for (const auto& [h, t] : enumerate_pairs(*docs[b]->doc)) {
        pairs.push_back({b, h, t});
      }
    }
  }
  out.pairs = std::move(pairs);
  const std::size_t R = model.config.relations;
  if (out.pairs.empty() || blocks.empty()) {
    out.entities = Tensor::zeros({total, model.config.dim});
    out.logits = Tensor::zeros({0, R + 1});
    out.scores = Tensor::zeros({0, R});
    return out;
  }
  out.entities = blocks.size() == 1 ? blocks[0]
                                    : concat_rows(std::span<const Tensor>(blocks));
  const std::size_t P = out.pairs.size();
  std::vector<std::size_t> hi(P), ti(P);
  for (std::size_t p = 0; p < P; ++p) {
    const auto& ref = out.pairs[p];
    const std::size_t n = docs[ref.doc]->mentions.size();
    if (ref.head >= n || ref.tail >= n || ref.head == ref.tail) {
      throw PreconditionError("forward: invalid pair (" +
                              std::to_string(ref.head) + ", " +
                              std::to_string(ref.tail) + ")");
    }
    hi[p] = offset[ref.doc] + ref.head;
    ti[p] = offset[ref.doc] + ref.tail;
  }
  Tensor heads, tails;
  if (model.config.bypass()) {
    heads = gather_rows(out.entities, hi);
    tails = gather_rows(out.entities, ti);
  } else {
    std::vector<std::size_t> stacked(2 * P), even(P), odd(P);
    for (std::size_t p = 0; p < P; ++p) {
      stacked[2 * p] = hi[p];
      stacked[2 * p + 1] = ti[p];
      even[p] = 2 * p;
      odd[p] = 2 * p + 1;
    }
    const auto layers = model.read_params();
    const Tensor z = read_batch(model.memory(),
                                gather_rows(out.entities, stacked), layers);
    heads = gather_rows(z, even);
    tails = gather_rows(z, odd);
  }
  out.logits = group_bilinear_logits(heads, tails, model.head());
  out.scores = class_scores(out.logits);
  return out;
}

PairForward forward_pair(const Model& model, const PreparedDocument& doc,
                         std::size_t head, std::size_t tail) {
  const PreparedDocument* one[] = {&doc};
  const BatchForward batch = forward_batch(model, one, {{0, head, tail}});
  const std::size_t R = model.config.relations;
  return {reshape(batch.logits, {R + 1}), reshape(batch.scores, {R})};
}

}  // namespace memre
