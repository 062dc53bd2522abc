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

#include "memre/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "memre/errors.hpp"

namespace memre {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

const char* prior_mode_name(PriorMode m) {
  switch (m) {
    case PriorMode::kFile:
      return "file";
    case PriorMode::kInflation:
      return "inflation";
    case PriorMode::kGlobal:
      return "global";
  }
  return "file";
}

PriorMode parse_prior_mode(const std::string& v) {
  if (v == "file") return PriorMode::kFile;
  if (v == "inflation") return PriorMode::kInflation;
  if (v == "global") return PriorMode::kGlobal;
  throw ConfigError("prior_mode must be file|inflation|global, got '" + v + "'");
}

template <typename T>
struct Field {
  std::function<void(T&, const std::string&)> set;
  std::function<std::string(const T&)> get;
};

#define SIZE_FIELD(obj, key, member)                                        \
  {key,                                                                     \
   {[](obj& c, const std::string& v) { c.member = to_uint(v); },            \
    [](const obj& c) { return std::to_string(c.member); }}}
#define DOUBLE_FIELD(obj, key, member)                                      \
  {key,                                                                     \
   {[](obj& c, const std::string& v) { c.member = to_double(v); },          \
    [](const obj& c) { return fmt_double(c.member); }}}
#define BOOL_FIELD(obj, key, member)                                        \
  {key,                                                                     \
   {[](obj& c, const std::string& v) { c.member = to_bool(v); },            \
    [](const obj& c) { return std::string(c.member ? "true" : "false"); }}}
#define LIST_FIELD(obj, key, member)                                        \
  {key,                                                                     \
   {[](obj& c, const std::string& v) { c.member = to_list(v); },            \
    [](const obj& c) { return fmt_list(c.member); }}}

// Ordered as written by format_run_config.
const std::vector<std::pair<std::string, Field<RunConfig>>>& global_fields() {
  static const std::vector<std::pair<std::string, Field<RunConfig>>> fields = {
      SIZE_FIELD(RunConfig, "seed", seed),
      SIZE_FIELD(RunConfig, "dim", model.dim),
      SIZE_FIELD(RunConfig, "encoder_layers", model.encoder_layers),
      SIZE_FIELD(RunConfig, "heads", model.heads),
      SIZE_FIELD(RunConfig, "max_length", model.max_length),
      SIZE_FIELD(RunConfig, "memory_size", model.memory_size),
      SIZE_FIELD(RunConfig, "read_layers", model.read_layers),
      SIZE_FIELD(RunConfig, "read_hidden", model.read_hidden),
      SIZE_FIELD(RunConfig, "groups", model.groups),
      DOUBLE_FIELD(RunConfig, "beta1", train.optimizer.beta1),
      DOUBLE_FIELD(RunConfig, "beta2", train.optimizer.beta2),
      DOUBLE_FIELD(RunConfig, "eps", train.optimizer.eps),
      DOUBLE_FIELD(RunConfig, "weight_decay", train.optimizer.weight_decay),
      DOUBLE_FIELD(RunConfig, "clip_norm", train.clip_norm),
      DOUBLE_FIELD(RunConfig, "negative_rate", train.negative_rate),
      SIZE_FIELD(RunConfig, "checkpoint_every", train.checkpoint_every),
      BOOL_FIELD(RunConfig, "select_best_dev", train.select_best_dev),
      BOOL_FIELD(RunConfig, "gamma_weight", train.loss.use_gamma_weight),
      BOOL_FIELD(RunConfig, "clamp_nonnegative", train.loss.clamp_nonnegative),
      {"prior_mode",
       {[](RunConfig& c, const std::string& v) {
          c.prior_mode = parse_prior_mode(v);
        },
        [](const RunConfig& c) {
          return std::string(prior_mode_name(c.prior_mode));
        }}},
      DOUBLE_FIELD(RunConfig, "prior_inflation", prior_inflation),
      DOUBLE_FIELD(RunConfig, "prior_value", prior_value),
      DOUBLE_FIELD(RunConfig, "label_fraction", label_fraction),
      {"dev_split",
       {[](RunConfig& c, const std::string& v) { c.dev_split = v; },
        [](const RunConfig& c) { return c.dev_split; }}},
      {"eval_split",
       {[](RunConfig& c, const std::string& v) { c.eval_split = v; },
        [](const RunConfig& c) { return c.eval_split; }}},
      SIZE_FIELD(RunConfig, "train_docs", synth.train_docs),
      SIZE_FIELD(RunConfig, "distant_docs", synth.distant_docs),
      SIZE_FIELD(RunConfig, "dev_docs", synth.dev_docs),
      SIZE_FIELD(RunConfig, "test_docs", synth.test_docs),
      SIZE_FIELD(RunConfig, "entities_min", synth.entities_min),
      SIZE_FIELD(RunConfig, "entities_max", synth.entities_max),
      SIZE_FIELD(RunConfig, "mentions_max", synth.mentions_max),
      SIZE_FIELD(RunConfig, "sentences", synth.sentences),
      SIZE_FIELD(RunConfig, "sentence_length", synth.sentence_length),
      SIZE_FIELD(RunConfig, "filler_vocab", synth.filler_vocab),
      SIZE_FIELD(RunConfig, "name_pool", synth.name_pool),
      SIZE_FIELD(RunConfig, "types", synth.types),
      SIZE_FIELD(RunConfig, "type_synonyms", synth.type_synonyms),
      SIZE_FIELD(RunConfig, "latent_dim", synth.latent_dim),
      SIZE_FIELD(RunConfig, "relations", synth.relations),
      DOUBLE_FIELD(RunConfig, "unary_weight", synth.unary_weight),
      DOUBLE_FIELD(RunConfig, "entity_noise", synth.entity_noise),
      LIST_FIELD(RunConfig, "true_priors", synth.priors),
      LIST_FIELD(RunConfig, "keep_rates", synth.keep_rates),
      DOUBLE_FIELD(RunConfig, "distant_keep_rate", synth.distant_keep_rate),
      DOUBLE_FIELD(RunConfig, "distant_noise", synth.distant_noise),
  };
  return fields;
}

const std::vector<std::pair<std::string, Field<StageConfig>>>& stage_fields() {
  static const std::vector<std::pair<std::string, Field<StageConfig>>> fields =
      {
          {"split",
           {[](StageConfig& s, const std::string& v) { s.split = v; },
            [](const StageConfig& s) { return s.split; }}},
          SIZE_FIELD(StageConfig, "epochs", epochs),
          DOUBLE_FIELD(StageConfig, "lr", lr),
          SIZE_FIELD(StageConfig, "batch", batch_docs),
          {"loss",
           {[](StageConfig& s, const std::string& v) {
              s.loss = parse_loss_kind(v);
            },
            [](const StageConfig& s) { return std::string(loss_name(s.loss)); }}},
          BOOL_FIELD(StageConfig, "freeze_memory", freeze_memory),
      };
  return fields;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD
#undef LIST_FIELD

template <typename T>
const Field<T>* find_field(
    const std::vector<std::pair<std::string, Field<T>>>& fields,
    const std::string& key) {
  for (const auto& [name, field] : fields) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.train.stages.push_back(StageConfig{});
  return cfg;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool in_stage = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line != "[stage]") throw ConfigError(where + "unknown block " + line);
      cfg.train.stages.push_back(StageConfig{});
      in_stage = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (in_stage) {
        const auto* field = find_field(stage_fields(), key);
        if (!field) throw ConfigError("unknown stage key '" + key + "'");
        field->set(cfg.train.stages.back(), value);
      } else {
        const auto* field = find_field(global_fields(), key);
        if (!field) throw ConfigError("unknown key '" + key + "'");
        field->set(cfg, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (cfg.train.stages.empty()) cfg.train.stages.push_back(StageConfig{});
  try {
    validate_run_config(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  validate_train_config(cfg.train);
  validate_synth_config(cfg.synth);
  if (!(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0)) {
    throw ConfigError("label_fraction must be in (0, 1]");
  }
  if (!(cfg.prior_inflation >= 1.0)) {
    throw ConfigError("prior_inflation must be >= 1");
  }
  if (!(cfg.prior_value > 0.0 && cfg.prior_value < 1.0)) {
    throw ConfigError("prior_value must be in (0, 1)");
  }
}

RunConfig load_run_config(const std::string& path) {
  try {
    return parse_run_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : global_fields()) {
    out += name + " = " + field.get(cfg) + "\n";
  }
  for (const auto& stage : cfg.train.stages) {
    out += "\n[stage]\n";
    for (const auto& [name, field] : stage_fields()) {
      out += name + " = " + field.get(stage) + "\n";
    }
  }
  return out;
}

}  // namespace memre
