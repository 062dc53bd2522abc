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

#include "memre/pipeline.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include "memre/errors.hpp"

namespace memre {
namespace {

constexpr const char* kSplits[] = {"train", "distant", "dev", "test"};

// File names tried per split, in order. The DocRED-family names let a
// downloaded ReDocRED directory be used as is.
std::vector<std::string> split_candidates(const std::string& split) {
  std::vector<std::string> out = {split + ".jsonl", split + ".json"};
  if (split == "train") {
    out.insert(out.end(), {"train_revised.json", "train_annotated.json"});
  } else if (split == "distant") {
    out.push_back("train_distant.json");
  } else {
    out.push_back(split + "_revised.json");
  }
  return out;
}

RelationSchema read_relations(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return RelationSchema::from_names(names);
}

std::string join_relations(const RelationSchema& schema) {
  std::string out;
  for (const auto& n : schema.names()) out += n + "\n";
  return out;
}

}  // namespace

const Corpus& DataDir::gold(const std::string& split) const {
  const auto it = oracle.find(split);
  if (it != oracle.end()) return it->second;
  return observed(split);
}

const Corpus& DataDir::observed(const std::string& split) const {
  const auto it = splits.find(split);
  if (it == splits.end()) {
    throw InputError("data directory " + root.string() + " has no split '" +
                     split + "'");
  }
  return it->second;
}

std::filesystem::path resolve_data_root(const std::string& path) {
  if (!path.empty()) return path;
  if (const char* env = std::getenv("MEMRE_DATA"); env && *env) return env;
  throw ConfigError("no data directory: pass --data or set MEMRE_DATA");
}

DataDir load_data_dir(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw InputError("data directory not found: " + root.string());
  }
  DataDir data;
  data.root = root;
  const bool fixed = std::filesystem::exists(root / "relations.txt");
  RelationSchema schema;
  if (fixed) schema = read_relations(root / "relations.txt");
  // One schema threads through every split so ids agree.
  for (const char* split : kSplits) {
    for (const auto& name : split_candidates(split)) {
      const auto path = root / name;
      if (!std::filesystem::exists(path)) continue;
      Corpus c = load_corpus(path, schema);
      schema = c.relations;
      data.splits.emplace(split, std::move(c));
      break;
    }
    const auto oracle = root / "oracle" / (std::string(split) + ".jsonl");
    if (std::filesystem::exists(oracle)) {
      Corpus c = load_corpus(oracle, schema);
      schema = c.relations;
      data.oracle.emplace(split, std::move(c));
    }
    const auto priors = root / ("priors." + std::string(split) + ".tsv");
    if (std::filesystem::exists(priors)) {
      data.prior_files.emplace(split, read_prior_table(priors));
    }
  }
  if (data.splits.empty()) {
    throw InputError("no corpus files in " + root.string());
  }
  schema.freeze();
  data.relations = schema;
  for (auto* group : {&data.splits, &data.oracle}) {
    for (auto& [name, c] : *group) c.relations = schema;
  }
  return data;
}

void write_synth_data(const SynthCorpus& corpus,
                      const std::filesystem::path& root) {
  write_file(root / "relations.txt", join_relations(corpus.relations));
  for (const char* split : kSplits) {
    const auto it = corpus.splits.find(split);
    if (it == corpus.splits.end() || it->second.observed.docs.empty()) continue;
    const SynthSplit& s = it->second;
    write_file(root / (std::string(split) + ".jsonl"),
               serialize_generic_jsonl(s.observed));
    write_file(root / "oracle" / (std::string(split) + ".jsonl"),
               serialize_generic_jsonl(s.oracle));
    ClassPriorTable table = make_prior_table(s.priors.pi, s.priors.pi_labeled);
    for (std::size_t c = 0; c < table.size(); ++c) {
      table.classes[c].n_positive = s.priors.n_observed[c];
      table.classes[c].n_unlabeled =
          s.priors.candidate_pairs - s.priors.n_observed[c];
    }
    write_prior_table(root / ("priors." + std::string(split) + ".tsv"), table);
  }
}

ClassPriorTable resolve_priors(const RunConfig& cfg, const Corpus& corpus,
                               const ClassPriorTable* file) {
  PriorAssumption assumption;
  switch (cfg.prior_mode) {
    case PriorMode::kFile:
      if (!file) {
        throw ConfigError(
            "prior_mode = file but the data directory has no prior table for "
            "this split; use prior_mode = inflation or global");
      }
      for (const auto& c : file->classes) assumption.per_class.push_back(c.pi);
      break;
    case PriorMode::kInflation:
      assumption.inflation = cfg.prior_inflation;
      break;
    case PriorMode::kGlobal:
      assumption.global = cfg.prior_value;
      break;
  }
  return estimate_priors(corpus, assumption);
}

DistantSet default_ign_set(const DataDir& data) {
  if (data.splits.count("distant")) {
    return distant_triples(data.splits.at("distant"));
  }
  if (data.splits.count("train")) return distant_triples(data.splits.at("train"));
  return {};
}

Experiment run_experiment(const RunConfig& cfg, const DataDir& data,
                          const TrainOutput& output) {
  TrainData td;
  std::set<std::string> used;
  for (const auto& s : cfg.train.stages) used.insert(s.split);
  std::vector<const Corpus*> vocab_sources;
  for (const auto& name : used) {
    Corpus c = data.observed(name);
    if (name == "train" && cfg.label_fraction < 1.0) {
      c = drop_labels(c, cfg.label_fraction, Rng::mix(cfg.seed, 19));
    }
    td.splits.emplace(name, std::move(c));
  }
  for (const auto& [name, c] : td.splits) vocab_sources.push_back(&c);
  td.vocab = Vocabulary::build(vocab_sources);
  for (const auto& s : cfg.train.stages) {
    if (s.loss == LossKind::kPN || td.priors.count(s.split)) continue;
    const auto file = data.prior_files.find(s.split);
    td.priors.emplace(s.split,
                      resolve_priors(cfg, td.splits.at(s.split),
                                     file == data.prior_files.end()
                                         ? nullptr
                                         : &file->second));
  }
  if (!cfg.dev_split.empty() && data.splits.count(cfg.dev_split)) {
    td.dev = &data.gold(cfg.dev_split);
  }

  ModelConfig mc = cfg.model;
  mc.vocab_size = td.vocab.size();
  mc.relations = data.relations.size();
  mc.seed = cfg.seed;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;

  Experiment ex{init_model(mc), td.vocab, {}, std::nullopt};
  TrainOutput out = output;
  if (!out.dir.empty()) {
    td.vocab.save(out.dir / "vocab.txt");
    out.meta["vocab_file"] = "vocab.txt";
  }
  ex.report = train(ex.model, td, tc, out);
  if (!cfg.eval_split.empty() && data.splits.count(cfg.eval_split)) {
    const DistantSet ign = default_ign_set(data);
    ex.eval = evaluate_dev(ex.model, data.gold(cfg.eval_split), ex.vocab, &ign);
  }
  return ex;
}

}  // namespace memre
