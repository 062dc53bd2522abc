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

#include "doctest.h"
#include "memre/config.hpp"
#include "memre/errors.hpp"

namespace memre {
namespace {

TEST_CASE("defaults") {
  const RunConfig cfg = default_run_config();
  REQUIRE(cfg.train.stages.size() == 1);
  CHECK(cfg.train.stages[0].loss == LossKind::kSSRPU);
  CHECK(cfg.model.memory_size == 200);
  CHECK(cfg.prior_mode == PriorMode::kFile);
}

TEST_CASE("parse and format round-trip") {
  const std::string text = R"(# two-stage run
seed = 9
memory_size = 50
keep_rates = 0.19, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3
entity_noise = 0.25
prior_mode = inflation

[stage]
split = distant
epochs = 3
loss = pu
[stage]
split = train
lr = 0.0005
freeze_memory = true
)";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.seed == 9);
  CHECK(cfg.model.memory_size == 50);
  CHECK(cfg.synth.keep_rates.size() == 8);
  CHECK(cfg.synth.keep_rates[0] == 0.19);
  CHECK(cfg.prior_mode == PriorMode::kInflation);
  REQUIRE(cfg.train.stages.size() == 2);
  CHECK(cfg.train.stages[0].loss == LossKind::kPU);
  CHECK(cfg.train.stages[1].freeze_memory);
  const std::string canonical = format_run_config(cfg);
  CHECK(format_run_config(parse_run_config(canonical)) == canonical);
}

TEST_CASE("errors name the line") {
  CHECK_THROWS_WITH_AS(parse_run_config("seed = 1\nbogus = 2\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("memory_size = -3\n"),
                       doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[stage]\nloss = hinge\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dim\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[stage]\nsplit = train\nfreeze_memory = "
                                   "true\n[stage]\nsplit = train\n"),
                  ConfigError);
}

}  // namespace
}  // namespace memre
