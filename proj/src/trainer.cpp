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

#include "memre/trainer.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <tuple>

#include "json.hpp"
#include "memre/errors.hpp"

namespace memre {
namespace {

constexpr std::size_t kEvalBatchDocs = 16;

using LabelKey = std::tuple<std::size_t, std::size_t, std::size_t>;

// AdamW with decoupled weight decay; one step counter per parameter so a
// frozen parameter resumes with correct bias correction.
class AdamW {
 public:
  AdamW(const ParameterStore& params, const OptimizerConfig& cfg)
      : cfg_(cfg), slots_(params.size()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::size_t n = params.entries()[i].second.numel();
      slots_[i].m.assign(n, 0.0);
      slots_[i].v.assign(n, 0.0);
    }
  }

  void step(const ParameterStore& params, const std::vector<bool>& trainable,
            double lr, double grad_scale) {
    const auto& entries = params.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!trainable[i]) continue;
      Tensor p = entries[i].second;  // shares the stored node
      Slot& s = slots_[i];
      ++s.t;
      const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(s.t));
      const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(s.t));
      const auto g = p.grad();
      auto w = p.mutable_values();
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g.empty() ? 0.0 : g[j] * grad_scale;
        s.m[j] = cfg_.beta1 * s.m[j] + (1.0 - cfg_.beta1) * gj;
        s.v[j] = cfg_.beta2 * s.v[j] + (1.0 - cfg_.beta2) * gj * gj;
        const double update = (s.m[j] / c1) / (std::sqrt(s.v[j] / c2) + cfg_.eps);
        w[j] -= lr * (update + cfg_.weight_decay * w[j]);
      }
    }
  }

 private:
  struct Slot {
    std::vector<double> m, v;
    std::uint64_t t = 0;
  };
  OptimizerConfig cfg_;
  std::vector<Slot> slots_;
};

std::set<LabelKey> label_keys(const Document& doc) {
  std::set<LabelKey> keys;
  for (const auto& t : doc.labels) keys.emplace(t.head, t.tail, t.relation);
  return keys;
}

const ClassPriorTable& stage_priors(const TrainData& data,
                                    const StageConfig& stage) {
  const auto it = data.priors.find(stage.split);
  if (it == data.priors.end()) {
    throw ConfigError(std::string("loss ") + loss_name(stage.loss) +
                      " needs a prior table for split '" + stage.split + "'");
  }
  return it->second;
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.stages.empty()) throw ConfigError("train: no stages");
  bool frozen = false;
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const auto& s = cfg.stages[i];
    const std::string where = "stage " + std::to_string(i + 1) + ": ";
    if (s.epochs < 1) throw ConfigError(where + "epochs must be >= 1");
    if (s.batch_docs < 1) throw ConfigError(where + "batch must be >= 1");
    if (!(s.lr >= 0.0) || !std::isfinite(s.lr)) {
      throw ConfigError(where + "lr must be a finite non-negative number");
    }
    if (frozen && !s.freeze_memory) {
      throw ConfigError(where + "memory cannot be unfrozen after a frozen stage");
    }
    frozen = frozen || s.freeze_memory;
  }
  if (!(cfg.negative_rate > 0.0 && cfg.negative_rate <= 1.0)) {
    throw ConfigError("train: negative_rate must be in (0, 1]");
  }
  if (!(cfg.clip_norm >= 0.0)) throw ConfigError("train: clip_norm must be >= 0");
  const auto& o = cfg.optimizer;
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0 && o.beta2 >= 0.0 && o.beta2 < 1.0)) {
    throw ConfigError("train: betas must be in [0, 1)");
  }
  if (!(o.eps > 0.0)) throw ConfigError("train: eps must be > 0");
  if (!(o.weight_decay >= 0.0)) {
    throw ConfigError("train: weight_decay must be >= 0");
  }
}

std::vector<PreparedDocument> prepare_corpus(const Corpus& corpus,
                                             const Vocabulary& vocab) {
  std::vector<PreparedDocument> out;
  out.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) out.push_back(prepare_document(doc, vocab));
  return out;
}

BatchScores batch_scores(const BatchForward& forward,
                         std::span<const PreparedDocument* const> docs,
                         std::size_t relations, double negative_rate,
                         Rng* rng) {
  std::vector<std::set<LabelKey>> keys;
  keys.reserve(docs.size());
  for (const auto* d : docs) keys.push_back(label_keys(*d->doc));
  BatchScores batch;
  batch.scores = forward.scores;
  const std::size_t P = forward.pairs.size();
  batch.positive.assign(P * relations, 0);
  batch.unlabeled.assign(P * relations, 0);
  for (std::size_t p = 0; p < P; ++p) {
    const auto& ref = forward.pairs[p];
    bool any = false;
    for (std::size_t r = 0; r < relations; ++r) {
      if (keys[ref.doc].count({ref.head, ref.tail, r + 1})) {
        batch.positive[p * relations + r] = 1;
        any = true;
      }
    }
    // Label-free pairs may be subsampled; labeled pairs stay in the
    // unlabeled pool of their other classes.
    if (!any && negative_rate < 1.0 && rng && !rng->bernoulli(negative_rate)) {
      continue;
    }
    for (std::size_t r = 0; r < relations; ++r) {
      batch.unlabeled[p * relations + r] = !batch.positive[p * relations + r];
    }
  }
  return batch;
}

Tensor batch_loss(const Model& model,
                  std::span<const PreparedDocument* const> docs,
                  LossKind kind, const ClassPriorTable& priors,
                  const LossConfig& cfg) {
  const BatchForward forward = forward_batch(model, docs);
  const BatchScores batch =
      batch_scores(forward, docs, model.config.relations);
  return risk(kind, batch, priors, cfg);
}

PredictionSet predict(const Model& model, const Corpus& corpus,
                      const Vocabulary& vocab) {
  NoGradGuard no_grad;
  const auto prepared = prepare_corpus(corpus, vocab);
  const std::size_t R = model.config.relations;
  PredictionSet out;
  for (std::size_t begin = 0; begin < prepared.size(); begin += kEvalBatchDocs) {
    const std::size_t end = std::min(prepared.size(), begin + kEvalBatchDocs);
    std::vector<const PreparedDocument*> docs;
    for (std::size_t i = begin; i < end; ++i) docs.push_back(&prepared[i]);
    const BatchForward forward = forward_batch(model, docs);
    const auto scores = forward.scores.values();
    for (std::size_t p = 0; p < forward.pairs.size(); ++p) {
      const auto& ref = forward.pairs[p];
      const Document& doc = *docs[ref.doc]->doc;
      for (std::size_t r : decode(scores.subspan(p * R, R))) {
        out.insert({doc.id, ref.head, ref.tail, r, doc.entity_name(ref.head),
                    doc.entity_name(ref.tail)});
      }
    }
  }
  return out;
}

MetricReport evaluate_dev(const Model& model, const Corpus& dev,
                          const Vocabulary& vocab, const DistantSet* distant,
                          std::optional<std::size_t> topk) {
  if (dev.docs.empty()) throw PreconditionError("evaluate: empty corpus");
  return make_report(predict(model, dev, vocab), gold_facts(dev),
                     model.config.relations, distant, topk);
}

std::string train_report_json(const TrainReport& report) {
  nlohmann::ordered_json j;
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : report.epochs) {
    nlohmann::ordered_json row;
    row["stage"] = e.stage;
    row["epoch"] = e.epoch;
    row["loss"] = e.loss;
    row["steps"] = e.steps;
    if (e.dev) {
      row["dev"] = {{"precision", e.dev->precision},
                    {"recall", e.dev->recall},
                    {"f1", e.dev->f1}};
    } else {
      row["dev"] = nullptr;
    }
    epochs.push_back(row);
  }
  j["epochs"] = epochs;
  j["checkpoint"] = report.checkpoint;
  j["best_epoch"] = report.best_epoch ? nlohmann::ordered_json(*report.best_epoch)
                                      : nlohmann::ordered_json();
  j["best_dev_f1"] = report.best_dev_f1;
  return j.dump(2) + "\n";
}

TrainReport train(Model& model, const TrainData& data, const TrainConfig& cfg,
                  const TrainOutput& output) {
  validate_train_config(cfg);
  const std::size_t R = model.config.relations;
  const bool write = !output.dir.empty();
  TrainReport report;
  AdamW optimizer(model.params, cfg.optimizer);
  std::optional<ParameterStore> best;
  Rng rng(Rng::mix(cfg.seed, 101));

  auto save = [&](const std::filesystem::path& path) {
    save_model(path, model, output.meta);
    return path.filename().string();
  };

  for (std::size_t si = 0; si < cfg.stages.size(); ++si) {
    const StageConfig& stage = cfg.stages[si];
    const auto start = std::chrono::steady_clock::now();
    const auto split = data.splits.find(stage.split);
    if (split == data.splits.end()) {
      throw ConfigError("stage " + std::to_string(si + 1) + ": no split '" +
                        stage.split + "'");
    }
    const ClassPriorTable empty_table;
    const ClassPriorTable& priors =
        stage.loss == LossKind::kPN ? empty_table : stage_priors(data, stage);
    const auto prepared = prepare_corpus(split->second, data.vocab);
    if (prepared.empty()) {
      throw ConfigError("stage " + std::to_string(si + 1) + ": split '" +
                        stage.split + "' is empty");
    }
    std::vector<bool> trainable(model.params.size(), true);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      if (stage.freeze_memory &&
          is_memory_token_param(model.params.entries()[i].first)) {
        trainable[i] = false;
      }
    }
    std::vector<std::size_t> order(prepared.size());
    for (std::size_t e = 0; e < stage.epochs; ++e) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
      }
      EpochRecord record;
      record.stage = si;
      record.epoch = e;
      double loss_sum = 0.0;
      for (std::size_t b = 0; b < order.size(); b += stage.batch_docs) {
        std::vector<const PreparedDocument*> docs;
        for (std::size_t i = b; i < std::min(order.size(), b + stage.batch_docs);
             ++i) {
          docs.push_back(&prepared[order[i]]);
        }
        const BatchForward forward = forward_batch(model, docs);
        if (forward.pairs.empty()) continue;
        const BatchScores batch =
            batch_scores(forward, docs, R, cfg.negative_rate, &rng);
        model.params.zero_grad();
        const Tensor loss = risk(stage.loss, batch, priors, cfg.loss);
        const double value = loss.item();
        double norm2 = 0.0;
        if (std::isfinite(value)) {
          backward(loss);
          for (std::size_t i = 0; i < model.params.size(); ++i) {
            if (!trainable[i]) continue;
            for (double g : model.params.entries()[i].second.grad()) {
              norm2 += g * g;
            }
          }
        }
        if (!std::isfinite(value) || !std::isfinite(norm2)) {
          std::string where;
          if (write) where = ", last good parameters in " +
                             save(output.dir / "last_good.ckpt");
          throw NumericError("non-finite loss at stage " +
                             std::to_string(si + 1) + " epoch " +
                             std::to_string(e + 1) + where);
        }
        const double norm = std::sqrt(norm2);
        const double scale =
            cfg.clip_norm > 0.0 && norm > cfg.clip_norm ? cfg.clip_norm / norm
                                                        : 1.0;
        optimizer.step(model.params, trainable, stage.lr, scale);
        loss_sum += value;
        ++record.steps;
      }
      model.params.zero_grad();
      record.loss = record.steps ? loss_sum / static_cast<double>(record.steps)
                                 : 0.0;
      if (data.dev) {
        record.dev = evaluate_dev(model, *data.dev, data.vocab).overall;
        if (!report.best_epoch || record.dev->f1 > report.best_dev_f1) {
          report.best_epoch = report.epochs.size();
          report.best_dev_f1 = record.dev->f1;
          if (cfg.select_best_dev) best = model.params.deep_copy();
        }
      }
      report.epochs.push_back(record);
      if (write && cfg.checkpoint_every > 0 &&
          (e + 1) % cfg.checkpoint_every == 0) {
        save(output.dir / ("stage" + std::to_string(si + 1) + "-epoch" +
                           std::to_string(e + 1) + ".ckpt"));
      }
    }
    report.stage_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count());
  }
  if (best) model.params.assign_values(*best);
  if (write) report.checkpoint = save(output.dir / "model.ckpt");
  return report;
}

}  // namespace memre
