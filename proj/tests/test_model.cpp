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
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "memre/checkpoint.hpp"
#include "memre/errors.hpp"
#include "memre/model.hpp"

#ifndef MEMRE_FIXTURES
#define MEMRE_FIXTURES "fixtures"
#endif

namespace memre {
namespace {

namespace fs = std::filesystem;

ModelConfig small_config(std::size_t vocab, std::size_t memory) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.relations = 7;
  cfg.dim = 16;
  cfg.groups = 4;
  cfg.memory_size = memory;
  cfg.read_layers = 2;
  cfg.encoder_layers = 1;
  return cfg;
}

TEST_CASE("hex doubles round-trip bit-exactly") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-310, -2.5e300, 6.02214076e23}) {
    const double back = parse_hex_double(format_hex_double(v));
    CHECK(std::memcmp(&v, &back, sizeof v) == 0);
  }
  CHECK_THROWS_AS(parse_hex_double("zz"), ParseError);
}

TEST_CASE("batched forward equals per-pair forward") {
  const Corpus c = load_corpus(fs::path(MEMRE_FIXTURES) / "docred_mini.json");
  const Vocabulary vocab = Vocabulary::build({&c});
  for (std::size_t memory : {0u, 5u}) {
    CAPTURE(memory);
    const Model model = init_model(small_config(vocab.size(), memory));
    std::vector<PreparedDocument> docs;
    for (const auto& d : c.docs) docs.push_back(prepare_document(d, vocab));
    std::vector<const PreparedDocument*> ptrs;
    for (const auto& d : docs) ptrs.push_back(&d);
    const BatchForward batch = forward_batch(model, ptrs);
    std::size_t expected = 0;
    for (const auto& d : c.docs) expected += enumerate_pairs(d).size();
    REQUIRE(batch.pairs.size() == expected);
    for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
      const PairRef& ref = batch.pairs[p];
      const PairForward one = forward_pair(model, docs[ref.doc], ref.head, ref.tail);
      for (std::size_t r = 0; r < 7; ++r) {
        CHECK(std::abs(batch.scores.at(p, r) - one.scores.at(r)) < 1e-12);
      }
    }
  }
}

TEST_CASE("checkpoint round trip reproduces the forward pass") {
  const Corpus c = load_corpus(fs::path(MEMRE_FIXTURES) / "docred_mini.json");
  const Vocabulary vocab = Vocabulary::build({&c});
  const Model model = init_model(small_config(vocab.size(), 4));
  const fs::path path = fs::temp_directory_path() / "memre_model_test.ckpt";
  save_model(path, model, {{"note", "x"}});
  std::map<std::string, std::string> meta;
  const Model back = load_model(path, &meta);
  CHECK(meta.at("note") == "x");
  CHECK(back.config.memory_size == 4);
  CHECK(back.params.size() == model.params.size());
  const PreparedDocument doc = prepare_document(c.docs[1], vocab);
  const auto a = forward_pair(model, doc, 0, 3).scores;
  const auto b = forward_pair(back, doc, 0, 3).scores;
  for (std::size_t r = 0; r < a.numel(); ++r) CHECK(a.at(r) == b.at(r));

  // The saved head is split per class and group.
  const Checkpoint raw = load_checkpoint(path);
  CHECK(raw.params.contains("head.class0.group0"));
  CHECK(raw.params.contains("head.class7.group3"));
}

TEST_CASE("damaged checkpoints are rejected") {
  const fs::path dir = fs::temp_directory_path();
  {
    std::ofstream(dir / "memre_bad1.ckpt") << "not-a-checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "memre_bad1.ckpt"), ParseError);
  CHECK_THROWS_AS(load_checkpoint(dir / "memre_absent.ckpt"), InputError);

  const Corpus c = load_corpus(fs::path(MEMRE_FIXTURES) / "docred_mini.json");
  const Vocabulary vocab = Vocabulary::build({&c});
  save_model(dir / "memre_trunc.ckpt", init_model(small_config(vocab.size(), 4)));
  std::string text;
  {
    std::ifstream in(dir / "memre_trunc.ckpt");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream(dir / "memre_trunc.ckpt") << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS(load_model(dir / "memre_trunc.ckpt"), ParseError);
}

TEST_CASE("model configuration checks") {
  ModelConfig cfg = small_config(10, 4);
  cfg.groups = 3;
  CHECK_THROWS_AS(validate_model_config(cfg), ConfigError);
  cfg = small_config(10, 4);
  cfg.encoder_layers = 3;
  CHECK_THROWS_AS(validate_model_config(cfg), ConfigError);
  cfg = small_config(10, 4);
  const ModelConfig back = model_config_from_meta(model_meta(cfg));
  CHECK(back.dim == cfg.dim);
  CHECK(back.read_layers == cfg.read_layers);
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("same seed, same parameters") {
  const Model a = init_model(small_config(12, 3));
  const Model b = init_model(small_config(12, 3));
  REQUIRE(a.params.size() == b.params.size());
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params.entries()[i].second.values();
    const auto& y = b.params.entries()[i].second.values();
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
  }
}

TEST_CASE("entities past the truncation point still get a vector") {
  Corpus c = load_corpus(fs::path(MEMRE_FIXTURES) / "docred_mini.json");
  const Vocabulary vocab = Vocabulary::build({&c});
  ModelConfig cfg = small_config(vocab.size(), 0);
  cfg.max_length = 4;
  const Model model = init_model(cfg);
  const PreparedDocument doc = prepare_document(c.docs[0], vocab);
  const Tensor e = entity_embeddings(model, doc);
  CHECK(e.rows() == 3);
  for (double v : e.values()) CHECK(std::isfinite(v));
}

}  // namespace
}  // namespace memre
