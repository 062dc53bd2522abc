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

#ifndef MEMRE_PIPELINE_HPP_
#define MEMRE_PIPELINE_HPP_

// Data directories and end-to-end runs shared by the CLI, the ablation
// driver and the acceptance suite.
//
// Data directory layout:
//   relations.txt              one relation name per line, id = line + 1
//   <split>.jsonl | .json      observed labels (train, distant, dev, test)
//   oracle/<split>.jsonl       true labels, when known
//   priors.<split>.tsv         prior table with the true pi per class

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "memre/config.hpp"
#include "memre/data.hpp"
#include "memre/loss.hpp"
#include "memre/metrics.hpp"
#include "memre/model.hpp"
#include "memre/trainer.hpp"

namespace memre {

struct DataDir {
  std::filesystem::path root;
  RelationSchema relations;
  std::map<std::string, Corpus> splits;
  std::map<std::string, Corpus> oracle;
  std::map<std::string, ClassPriorTable> prior_files;

  // Oracle labels when present, else the observed split. Throws InputError
  // for an unknown split.
  const Corpus& gold(const std::string& split) const;
  const Corpus& observed(const std::string& split) const;
};

// Resolves the root: `path` if non-empty, else $MEMRE_DATA.
std::filesystem::path resolve_data_root(const std::string& path);
DataDir load_data_dir(const std::filesystem::path& root);

// Writes the layout above for a synthetic corpus.
void write_synth_data(const SynthCorpus& corpus,
                      const std::filesystem::path& root);

// Prior table for a corpus under the configured prior mode. `file` supplies
// the true pi per class in file mode.
ClassPriorTable resolve_priors(const RunConfig& cfg, const Corpus& corpus,
                               const ClassPriorTable* file);

struct Experiment {
  Model model;
  Vocabulary vocab;
  TrainReport report;
  std::optional<MetricReport> eval;  // on cfg.eval_split gold
};

// Builds the vocabulary from the stage splits, applies label_fraction to the
// train split, trains, and evaluates on the eval split when present.
Experiment run_experiment(const RunConfig& cfg, const DataDir& data,
                          const TrainOutput& output = {});

// Triples Ign-F1 discounts by default: the distant split if present,
// otherwise the train split.
DistantSet default_ign_set(const DataDir& data);

}  // namespace memre

#endif  // MEMRE_PIPELINE_HPP_
