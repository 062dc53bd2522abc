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

#include "memre/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "memre/config.hpp"
#include "memre/errors.hpp"
#include "memre/evalx.hpp"
#include "memre/pipeline.hpp"

#ifndef MEMRE_GIT_DESCRIBE
#define MEMRE_GIT_DESCRIBE "unknown"
#endif

namespace memre {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// State shared by every command invocation.
struct Invocation {
  std::vector<std::string> args;
  std::optional<std::string> config_text;  // replay: overrides --config
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

class Manifest {
 public:
  Manifest(const Invocation& inv, const std::string& command)
      : started_(utc_now()), clock_(std::chrono::steady_clock::now()) {
    j_["command"] = command;
    j_["args"] = inv.args;
    j_["resolved_config"] = nullptr;
    j_["seed"] = nullptr;
    j_["git_describe"] = build_describe();
  }
  void config(const RunConfig& cfg) {
    j_["resolved_config"] = format_run_config(cfg);
    j_["seed"] = cfg.seed;
  }
  void seed(std::uint64_t s) { j_["seed"] = s; }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  void timing(const std::string& key, double seconds) { timing_[key] = seconds; }
  void write(const fs::path& path) {
    j_["started_at"] = started_;
    j_["finished_at"] = utc_now();
    timing_["total"] = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - clock_)
                           .count();
    j_["wall_seconds"] = timing_;
    j_["outputs"] = outputs_;
    write_file(path, j_.dump(2) + "\n");
  }

 private:
  Json j_;
  Json timing_ = Json::object();
  std::vector<std::string> outputs_;
  std::string started_;
  std::chrono::steady_clock::time_point clock_;
};

RunConfig resolve_config(const Invocation& inv, const std::string& path) {
  if (inv.config_text) return parse_run_config(*inv.config_text);
  if (path.empty()) return default_run_config();
  return load_run_config(path);
}

void write_output(Manifest& manifest, const fs::path& path,
                  const std::string& content) {
  write_file(path, content);
  manifest.output(path);
}

Vocabulary checkpoint_vocab(const fs::path& ckpt,
                            const std::map<std::string, std::string>& meta) {
  const auto it = meta.find("vocab_file");
  if (it == meta.end()) {
    throw InputError(ckpt.string() + ": checkpoint meta has no vocab_file");
  }
  return Vocabulary::load(ckpt.parent_path() / it->second);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int dispatch(const Invocation& inv);

// --- commands --------------------------------------------------------------

struct GenDataArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

void cmd_gen_data(const Invocation& inv, const GenDataArgs& a) {
  RunConfig cfg = resolve_config(inv, a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.synth.seed = cfg.seed;
  Manifest manifest(inv, "gen-data");
  manifest.config(cfg);
  const SynthCorpus corpus = synthesize_pu_corpus(cfg.synth);
  const fs::path out = a.out;
  write_synth_data(corpus, out);
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      manifest.output(entry.path());
    }
  }
  std::ostringstream summary;
  for (const auto& [name, split] : corpus.splits) {
    summary << name << ": " << split.observed.docs.size() << " docs, "
            << split.observed.triple_count() << " observed / "
            << split.oracle.triple_count() << " true triples\n";
  }
  *inv.out << summary.str();
  manifest.write(out / "manifest.json");
}

struct TrainArgs {
  std::string config, data, out, loss;
  std::optional<std::size_t> memory_size;
  std::optional<std::uint64_t> seed;
};

void cmd_train(const Invocation& inv, const TrainArgs& a) {
  RunConfig cfg = resolve_config(inv, a.config);
  if (!a.loss.empty()) {
    const LossKind kind = parse_loss_kind(a.loss);
    for (auto& s : cfg.train.stages) s.loss = kind;
  }
  if (a.memory_size) cfg.model.memory_size = *a.memory_size;
  if (a.seed) cfg.seed = *a.seed;
  Manifest manifest(inv, "train");
  manifest.config(cfg);
  const DataDir data = load_data_dir(resolve_data_root(a.data));
  const fs::path out = a.out;
  fs::create_directories(out);
  TrainOutput output;
  output.dir = out;
  Experiment ex;
  try {
    ex = run_experiment(cfg, data, output);
  } catch (const NumericError&) {
    manifest.write(out / "manifest.json");
    throw;
  }
  manifest.output(out / "vocab.txt");
  manifest.output(out / ex.report.checkpoint);
  for (std::size_t s = 0; s < ex.report.stage_seconds.size(); ++s) {
    manifest.timing("stage" + std::to_string(s + 1), ex.report.stage_seconds[s]);
  }
  write_output(manifest, out / "train_report.json", train_report_json(ex.report));
  if (ex.eval) {
    write_output(manifest, out / ("metrics." + cfg.eval_split + ".json"),
                 report_to_json(*ex.eval));
    *inv.out << cfg.eval_split << " f1 " << ex.eval->overall.f1 << "\n";
  }
  manifest.write(out / "manifest.json");
}

struct EvalArgs {
  std::string ckpt, data, split = "dev", ign_against, out;
  std::optional<std::size_t> topk;
};

void cmd_eval(const Invocation& inv, const EvalArgs& a) {
  Manifest manifest(inv, "eval");
  const fs::path ckpt = a.ckpt;
  if (!fs::exists(ckpt)) throw InputError("checkpoint not found: " + a.ckpt);
  std::map<std::string, std::string> meta;
  const Model model = load_model(ckpt, &meta);
  const Vocabulary vocab = checkpoint_vocab(ckpt, meta);
  const DataDir data = load_data_dir(resolve_data_root(a.data));
  if (data.relations.size() != model.config.relations) {
    throw ConfigError("checkpoint has " +
                      std::to_string(model.config.relations) +
                      " relations, data has " +
                      std::to_string(data.relations.size()));
  }
  const DistantSet ign =
      a.ign_against.empty()
          ? default_ign_set(data)
          : distant_triples(load_corpus(a.ign_against, data.relations));
  const MetricReport report = evaluate_dev(
      model, data.gold(a.split), vocab, &ign, a.topk);
  const std::string json = report_to_json(report);
  const fs::path out =
      a.out.empty() ? ckpt.parent_path() / ("metrics." + a.split + ".json")
                    : fs::path(a.out);
  write_output(manifest, out, json);
  *inv.out << json;
  manifest.write(out.string() + ".manifest.json");
}

struct AblateArgs {
  std::string axis, values, config, data, out, seeds;
  std::size_t jobs = 1;
};

void cmd_ablate(const Invocation& inv, const AblateArgs& a) {
  const AblationAxis axis = parse_axis(a.axis);
  const auto values = split_list(a.values);
  if (values.empty()) throw ConfigError("--values is empty");
  const RunConfig cfg = resolve_config(inv, a.config);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(a.seeds)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + s + "'");
    }
  }
  if (seeds.empty()) seeds.push_back(cfg.seed);
  for (const auto& v : values) apply_axis(cfg, axis, v);  // validate early
  Manifest manifest(inv, "ablate");
  manifest.config(cfg);
  const DataDir data = load_data_dir(resolve_data_root(a.data));
  const auto rows = run_ablation(axis, values, cfg, data, seeds, a.jobs);
  const std::string csv = ablation_csv(rows);
  write_output(manifest, a.out, csv);
  *inv.out << csv;
  manifest.write(a.out + ".manifest.json");
}

struct PcaArgs {
  std::string ckpt, data, out, split = "dev";
};

void cmd_export_pca(const Invocation& inv, const PcaArgs& a) {
  Manifest manifest(inv, "export-pca");
  const fs::path ckpt = a.ckpt;
  if (!fs::exists(ckpt)) throw InputError("checkpoint not found: " + a.ckpt);
  std::map<std::string, std::string> meta;
  const Model model = load_model(ckpt, &meta);
  const Vocabulary vocab = checkpoint_vocab(ckpt, meta);
  const DataDir data = load_data_dir(resolve_data_root(a.data));
  const auto points = export_memory_pca(model, vocab, data.observed(a.split));
  write_output(manifest, a.out, pca_csv(points));
  manifest.write(a.out + ".manifest.json");
}

struct ReplayArgs {
  std::string manifest, out;
};

int cmd_replay(const Invocation& inv, const ReplayArgs& a) {
  Json j;
  try {
    j = Json::parse(read_file(a.manifest));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(a.manifest + ": " + e.what());
  }
  if (!j.contains("args") || !j["args"].is_array()) {
    throw ParseError(a.manifest + ": manifest has no args");
  }
  Invocation next = inv;
  next.args = j["args"].get<std::vector<std::string>>();
  if (!next.args.empty() && next.args[0] == "replay") {
    throw ConfigError("refusing to replay a replay manifest");
  }
  if (j.contains("resolved_config") && j["resolved_config"].is_string()) {
    next.config_text = j["resolved_config"].get<std::string>();
  }
  if (!a.out.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < next.args.size(); ++i) {
      if (next.args[i] == "--out") {
        next.args[i + 1] = a.out;
        replaced = true;
      }
    }
    if (!replaced) throw ConfigError("manifest command has no --out to redirect");
  }
  return dispatch(next);
}

int dispatch(const Invocation& inv) {
  CLI::App app{"memre: memory-augmented document-level relation extraction"};
  app.name("memre");
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic PU corpus");
  gen_cmd->add_option("--config", gen.config, "Config file");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", tr.config, "Config file");
  train_cmd->add_option("--data", tr.data, "Data directory (default $MEMRE_DATA)");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--loss", tr.loss, "pn|pu|ssr-pu for every stage");
  train_cmd->add_option("--memory-size", tr.memory_size, "Memory tokens; 0 = bypass");
  train_cmd->add_option("--seed", tr.seed, "Seed");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Data directory (default $MEMRE_DATA)");
  eval_cmd->add_option("--split", ev.split, "Split name")
      ->check(CLI::IsMember({"train", "distant", "dev", "test"}));
  eval_cmd->add_option("--ign-against", ev.ign_against,
                       "Corpus whose triples Ign-F1 discounts");
  eval_cmd->add_option("--topk", ev.topk, "Top-K frequency split");
  eval_cmd->add_option("--out", ev.out, "Metric report path");

  AblateArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run an ablation sweep");
  ablate_cmd->add_option("--axis", ab.axis, "memory-size|read-layers|label-fraction")
      ->required();
  ablate_cmd->add_option("--values", ab.values, "Comma-separated values")->required();
  ablate_cmd->add_option("--config", ab.config, "Config file");
  ablate_cmd->add_option("--data", ab.data, "Data directory (default $MEMRE_DATA)");
  ablate_cmd->add_option("--out", ab.out, "CSV path")->required();
  ablate_cmd->add_option("--seeds", ab.seeds, "Comma-separated seeds");
  ablate_cmd->add_option("--jobs", ab.jobs, "Parallel workers");

  PcaArgs pc;
  auto* pca_cmd = app.add_subcommand("export-pca", "PCA of memory tokens and entities");
  pca_cmd->add_option("--ckpt", pc.ckpt, "Checkpoint")->required();
  pca_cmd->add_option("--data", pc.data, "Data directory (default $MEMRE_DATA)");
  pca_cmd->add_option("--out", pc.out, "CSV path")->required();
  pca_cmd->add_option("--split", pc.split, "Split whose entities are projected");

  ReplayArgs rp;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay_cmd->add_option("--manifest", rp.manifest, "Manifest JSON")->required();
  replay_cmd->add_option("--out", rp.out, "Redirect the command's --out");

  std::vector<std::string> argv_store = {"memre"};
  argv_store.insert(argv_store.end(), inv.args.begin(), inv.args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, *inv.out, *inv.err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*gen_cmd) cmd_gen_data(inv, gen);
  if (*train_cmd) cmd_train(inv, tr);
  if (*eval_cmd) cmd_eval(inv, ev);
  if (*ablate_cmd) cmd_ablate(inv, ab);
  if (*pca_cmd) cmd_export_pca(inv, pc);
  if (*replay_cmd) return cmd_replay(inv, rp);
  return kExitOk;
}

}  // namespace

const char* build_describe() { return MEMRE_GIT_DESCRIBE; }

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Invocation inv;
  inv.args = args;
  inv.out = &out;
  inv.err = &err;
  try {
    return dispatch(inv);
  } catch (const NumericError& e) {
    err << "memre: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& e) {
    err << "memre: config error: " << e.what() << "\n";
  } catch (const InputError& e) {
    err << "memre: input error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "memre: parse error: " << e.what() << "\n";
  } catch (const InvalidPriorError& e) {
    err << "memre: invalid prior: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "memre: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "memre: error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace memre
