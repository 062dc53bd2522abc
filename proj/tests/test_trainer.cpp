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
#include <filesystem>

#include "doctest.h"
#include "memre/checkpoint.hpp"
#include "memre/config.hpp"
#include "memre/errors.hpp"
#include "memre/pipeline.hpp"

namespace memre {
namespace {

namespace fs = std::filesystem;

RunConfig tiny_run(std::size_t memory) {
  RunConfig cfg = parse_run_config(R"(
seed = 4
dim = 16
memory_size = 4
read_layers = 1
train_docs = 30
distant_docs = 20
dev_docs = 10
test_docs = 10
type_synonyms = 1
entity_noise = 0.3
keep_rates = 0.5
[stage]
split = distant
epochs = 1
lr = 0.003
batch = 8
[stage]
split = train
epochs = 2
lr = 0.003
batch = 8
freeze_memory = true
)");
  cfg.model.memory_size = memory;
  return cfg;
}

const DataDir& tiny_data() {
  static const DataDir data = [] {
    const fs::path root = fs::temp_directory_path() / "memre_trainer_data";
    fs::remove_all(root);
    write_synth_data(synthesize_pu_corpus(tiny_run(4).synth), root);
    return load_data_dir(root);
  }();
  return data;
}

TEST_CASE("training is deterministic for a seed") {
  const RunConfig cfg = tiny_run(4);
  const Experiment a = run_experiment(cfg, tiny_data());
  const Experiment b = run_experiment(cfg, tiny_data());
  CHECK(train_report_json(a.report) == train_report_json(b.report));
  REQUIRE(a.eval);
  CHECK(report_to_json(*a.eval) == report_to_json(*b.eval));
  CHECK(a.report.epochs.size() == 3);
}

TEST_CASE("frozen memory tokens do not move") {
  RunConfig cfg = tiny_run(4);
  cfg.train.select_best_dev = false;
  cfg.train.stages[0].epochs = 0;
  cfg.train.stages.erase(cfg.train.stages.begin());
  const Experiment ex = run_experiment(cfg, tiny_data());
  const Model fresh = [&] {
    ModelConfig m = cfg.model;
    m.vocab_size = ex.model.config.vocab_size;
    m.relations = ex.model.config.relations;
    m.seed = cfg.seed;
    return init_model(m);
  }();
  const auto same = [&](const std::string& name) {
    const auto a = ex.model.params.get(name).values();
    const auto b = fresh.params.get(name).values();
    return std::equal(a.begin(), a.end(), b.begin());
  };
  CHECK(same("memory.M"));
  CHECK(same("memory.pos"));
  CHECK_FALSE(same("head.blocks"));
}

TEST_CASE("unfreezing after a frozen stage is rejected") {
  RunConfig cfg = tiny_run(4);
  cfg.train.stages[0].freeze_memory = true;
  cfg.train.stages[1].freeze_memory = false;
  CHECK_THROWS_AS(validate_train_config(cfg.train), ConfigError);
}

TEST_CASE("a diverging run stops with a numeric error and a last-good checkpoint") {
  RunConfig cfg = tiny_run(0);
  cfg.train.stages.resize(1);
  cfg.train.stages[0].split = "train";
  cfg.train.stages[0].epochs = 30;
  cfg.train.stages[0].lr = 1e300;
  cfg.train.clip_norm = 0.0;
  cfg.train.optimizer.eps = 1e-300;
  const fs::path out = fs::temp_directory_path() / "memre_diverge";
  fs::remove_all(out);
  TrainOutput output;
  output.dir = out;
  CHECK_THROWS_AS(run_experiment(cfg, tiny_data(), output), NumericError);
  CHECK(fs::exists(out / "last_good.ckpt"));
  CHECK_NOTHROW(load_checkpoint(out / "last_good.ckpt"));
}

TEST_CASE("checkpoint cadence") {
  RunConfig cfg = tiny_run(4);
  cfg.train.checkpoint_every = 1;
  const fs::path out = fs::temp_directory_path() / "memre_cadence";
  fs::remove_all(out);
  TrainOutput output;
  output.dir = out;
  const Experiment ex = run_experiment(cfg, tiny_data(), output);
  CHECK(fs::exists(out / "model.ckpt"));
  CHECK(fs::exists(out / "stage1-epoch1.ckpt"));
  CHECK(fs::exists(out / "stage2-epoch2.ckpt"));
  CHECK(fs::exists(out / "vocab.txt"));
  CHECK(ex.report.best_epoch.has_value());
}

TEST_CASE("missing priors for a pu stage are a config error") {
  RunConfig cfg = tiny_run(0);
  cfg.prior_mode = PriorMode::kFile;
  DataDir data = tiny_data();
  data.prior_files.clear();
  CHECK_THROWS_AS(run_experiment(cfg, data), ConfigError);
}

TEST_CASE("label fraction must be a keep probability") {
  CHECK_THROWS_AS(parse_run_config("label_fraction = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("label_fraction = 1.2\n"), ConfigError);
  const RunConfig cfg = parse_run_config("label_fraction = 0.19\n");
  CHECK(cfg.label_fraction == 0.19);
}

}  // namespace
}  // namespace memre
