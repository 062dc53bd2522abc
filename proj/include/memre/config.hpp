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

#ifndef MEMRE_CONFIG_HPP_
#define MEMRE_CONFIG_HPP_

// Run configuration file: UTF-8 `key = value` lines, `#` comments, and
// `[stage]` blocks that each open a new training stage. Keys before the
// first block are global.
//
//   seed = 3
//   memory_size = 200
//   [stage]
//   split = distant
//   loss = pu
//   [stage]
//   split = train
//   freeze_memory = true

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memre/data.hpp"
#include "memre/model.hpp"
#include "memre/trainer.hpp"

namespace memre {

enum class PriorMode { kFile, kInflation, kGlobal };

struct RunConfig {
  std::uint64_t seed = 1;
  ModelConfig model;          // vocab_size / relations filled from data
  TrainConfig train;
  SynthConfig synth;
  PriorMode prior_mode = PriorMode::kFile;
  double prior_inflation = 2.0;
  double prior_value = 0.1;
  double label_fraction = 1.0;  // keep-fraction applied to the train split
  std::string dev_split = "dev";
  std::string eval_split = "test";
};

// A config with one default stage (train split, SSR-PU).
RunConfig default_run_config();

// Throws ConfigError naming the line on unknown keys or bad values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Checks everything that does not depend on the data. parse_run_config
// calls it.
void validate_run_config(const RunConfig& cfg);

// Canonical text; parse_run_config(format_run_config(c)) reproduces c.
std::string format_run_config(const RunConfig& cfg);

}  // namespace memre

#endif  // MEMRE_CONFIG_HPP_
