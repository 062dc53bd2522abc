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

#ifndef MEMRE_TRAINER_HPP_
#define MEMRE_TRAINER_HPP_

// Staged training: each stage runs a number of epochs of AdamW over one data
// split with its own loss, learning rate and optional memory freeze. Dev F1
// is measured after every epoch and the best parameters are kept.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memre/data.hpp"
#include "memre/loss.hpp"
#include "memre/metrics.hpp"
#include "memre/model.hpp"
#include "memre/rng.hpp"

namespace memre {

struct StageConfig {
  std::string split = "train";
  std::size_t epochs = 1;
  double lr = 1e-3;
  std::size_t batch_docs = 4;
  LossKind loss = LossKind::kSSRPU;
  bool freeze_memory = false;
};

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct TrainConfig {
  std::vector<StageConfig> stages;
  OptimizerConfig optimizer;
  LossConfig loss;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;          // 0 disables clipping
  double negative_rate = 1.0;      // share of label-free pairs kept per batch
  std::size_t checkpoint_every = 0;  // epochs; 0 = only the final checkpoint
  bool select_best_dev = true;
};

// Throws ConfigError on empty stages, zero epochs or batch size, lr <= 0, or
// a stage that unfreezes memory after a frozen one.
void validate_train_config(const TrainConfig& cfg);

struct TrainData {
  std::map<std::string, Corpus> splits;
  std::map<std::string, ClassPriorTable> priors;  // needed by PU losses
  const Corpus* dev = nullptr;
  Vocabulary vocab;
};

struct EpochRecord {
  std::size_t stage = 0;
  std::size_t epoch = 0;
  double loss = 0.0;  // mean over batches
  std::size_t steps = 0;
  std::optional<PRF> dev;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<double> stage_seconds;
  std::string checkpoint;  // file name inside the output directory
  std::optional<std::size_t> best_epoch;  // index into `epochs`
  double best_dev_f1 = 0.0;
};

// Without a wall-clock field, so reruns produce identical bytes.
std::string train_report_json(const TrainReport& report);

struct TrainOutput {
  std::filesystem::path dir;  // empty: write nothing
  std::map<std::string, std::string> meta;
};

// Trains `model` in place. A non-finite loss or gradient aborts with
// NumericError after saving the last good parameters to dir/last_good.ckpt.
TrainReport train(Model& model, const TrainData& data, const TrainConfig& cfg,
                  const TrainOutput& output = {});

std::vector<PreparedDocument> prepare_corpus(const Corpus& corpus,
                                             const Vocabulary& vocab);

// Per-class labeled-positive / unlabeled masks for a forward batch. Pairs
// with no label are dropped from both sets with probability
// 1 - negative_rate.
BatchScores batch_scores(const BatchForward& forward,
                         std::span<const PreparedDocument* const> docs,
                         std::size_t relations, double negative_rate = 1.0,
                         Rng* rng = nullptr);

Tensor batch_loss(const Model& model,
                  std::span<const PreparedDocument* const> docs,
                  LossKind kind, const ClassPriorTable& priors,
                  const LossConfig& cfg);

PredictionSet predict(const Model& model, const Corpus& corpus,
                      const Vocabulary& vocab);

// Throws PreconditionError on an empty dev corpus.
MetricReport evaluate_dev(const Model& model, const Corpus& dev,
                          const Vocabulary& vocab,
                          const DistantSet* distant = nullptr,
                          std::optional<std::size_t> topk = std::nullopt);

}  // namespace memre

#endif  // MEMRE_TRAINER_HPP_
