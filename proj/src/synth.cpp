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

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <tuple>

#include "memre/data.hpp"
#include "memre/errors.hpp"
#include "memre/rng.hpp"

namespace memre {
namespace {

constexpr const char* kSplitNames[] = {"train", "distant", "dev", "test"};

constexpr std::size_t kCalibrationPairs = 20000;

struct World {
  std::size_t types = 0;
  std::size_t relations = 0;
  std::size_t latent_dim = 0;
  double unary_weight = 1.0;
  std::vector<double> latent;  // [T x L] type vectors
  // Per relation: A [L x L], head weights [L], tail weights [L].
  std::vector<std::vector<double>> pair_weights, head_weights, tail_weights;
  std::vector<double> thresholds;

  double score(std::size_t r, const double* ua, const double* ub) const {
    const std::size_t L = latent_dim;
    const auto& A = pair_weights[r];
    double pairwise = 0.0, unary = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) pairwise += ua[i] * A[i * L + j] * ub[j];
      unary += head_weights[r][i] * ua[i] + tail_weights[r][i] * ub[i];
    }
    return pairwise + unary_weight * unary;
  }

  // Relation ids 1..R.
  bool holds(std::size_t relation, const double* ua, const double* ub) const {
    return score(relation - 1, ua, ub) > thresholds[relation - 1];
  }
};

// Type vector plus the entity's own hidden offset.
std::vector<double> entity_latent(const World& world, std::size_t type,
                                  double noise, Rng& rng) {
  std::vector<double> u(world.latent.begin() + type * world.latent_dim,
                        world.latent.begin() + (type + 1) * world.latent_dim);
  if (noise > 0.0)
    for (auto& v : u) v += rng.normal(0.0, noise);
  return u;
}

World build_world(const SynthConfig& cfg) {
  Rng rng(Rng::mix(cfg.seed, 1000));
  const std::size_t T = cfg.types, L = cfg.latent_dim, R = cfg.relations;
  World world;
  world.types = T;
  world.relations = R;
  world.latent_dim = L;
  world.unary_weight = cfg.unary_weight;
  world.latent.resize(T * L);
  for (auto& v : world.latent) v = rng.normal();
  const auto priors = cfg.resolved_priors();

  const double pair_scale = 1.0 / std::sqrt(static_cast<double>(L));
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> A(L * L), head_w(L), tail_w(L);
    for (auto& v : A) v = rng.normal(0.0, pair_scale);
    for (auto& v : head_w) v = rng.normal();
    for (auto& v : tail_w) v = rng.normal();
    world.pair_weights.push_back(std::move(A));
    world.head_weights.push_back(std::move(head_w));
    world.tail_weights.push_back(std::move(tail_w));
  }
  // Without entity noise the score only depends on the type pair, so the
  // threshold is calibrated on the exact T x T grid; otherwise on a fixed
  // sample of entity pairs.
  const bool exact = cfg.entity_noise == 0.0;
  std::vector<std::vector<double>> heads, tails;
  if (exact) {
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b) {
        heads.push_back(entity_latent(world, a, 0.0, rng));
        tails.push_back(entity_latent(world, b, 0.0, rng));
      }
  } else {
    Rng cal(Rng::mix(cfg.seed, 1001));
    for (std::size_t i = 0; i < kCalibrationPairs; ++i) {
      const std::size_t a = cal.below(T);
      heads.push_back(entity_latent(world, a, cfg.entity_noise, cal));
      const std::size_t b = cal.below(T);
      tails.push_back(entity_latent(world, b, cfg.entity_noise, cal));
    }
  }
  const std::size_t cells = heads.size();
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> sorted(cells);
    for (std::size_t c = 0; c < cells; ++c)
      sorted[c] = world.score(r, heads[c].data(), tails[c].data());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double target = priors[r] * static_cast<double>(cells);
    const auto n = static_cast<std::size_t>(std::llround(target));
    if (n == 0 || n >= cells || sorted[n - 1] == sorted[n]) {
      throw ConfigError("synth: prior " + std::to_string(priors[r]) +
                        " for relation " + std::to_string(r + 1) +
                        " is not reachable on " + std::to_string(cells) +
                        " calibration pairs");
    }
    world.thresholds.push_back(0.5 * (sorted[n - 1] + sorted[n]));
  }
  return world;
}

struct Slot {
  bool mention = false;
  std::string token;
  std::size_t entity = 0;
  std::size_t type_token = 0;
};

Document make_document(const SynthConfig& cfg, const World& world,
                       const std::string& split, std::size_t index,
                       std::uint64_t seed,
                       std::vector<std::vector<double>>& latents) {
  Rng rng(seed);
  Document doc;
  doc.id = split + "-" + std::to_string(index);
  doc.split = split;
  const std::size_t n = cfg.entities_min +
                        rng.below(cfg.entities_max - cfg.entities_min + 1);
  std::vector<std::size_t> types(n);
  latents.assign(n, {});
  std::vector<std::size_t> names(n);
  std::set<std::size_t> used_names;
  for (std::size_t e = 0; e < n; ++e) {
    types[e] = rng.below(world.types);
    latents[e] = entity_latent(world, types[e], cfg.entity_noise, rng);
    std::size_t name = rng.below(cfg.name_pool);
    while (used_names.count(name)) name = (name + 1) % cfg.name_pool;
    used_names.insert(name);
    names[e] = name;
  }

  std::vector<std::vector<Slot>> sentences(cfg.sentences);
  for (auto& sent : sentences) {
    for (std::size_t i = 0; i < cfg.sentence_length; ++i) {
      sent.push_back({false, "w" + std::to_string(rng.below(cfg.filler_vocab)),
                      0, 0});
    }
  }
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t mentions = 1 + rng.below(cfg.mentions_max);
    for (std::size_t k = 0; k < mentions; ++k) {
      auto& sent = sentences[rng.below(cfg.sentences)];
      const std::size_t at = rng.below(sent.size() + 1);
      sent.insert(sent.begin() + static_cast<std::ptrdiff_t>(at),
                  Slot{true, "", e, rng.below(cfg.type_synonyms)});
    }
  }

  doc.entities.resize(n);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    auto& tokens = doc.sentences.emplace_back();
    for (const auto& slot : sentences[s]) {
      if (!slot.mention) {
        tokens.push_back(slot.token);
        continue;
      }
      const std::size_t e = slot.entity;
      EntityMention m;
      m.entity = e;
      m.sentence = s;
      m.start = tokens.size();
      tokens.push_back("ty" + std::to_string(types[e]) + "s" +
                       std::to_string(slot.type_token));
      tokens.push_back("n" + std::to_string(names[e]));
      m.end = tokens.size();
      m.name = "n" + std::to_string(names[e]);
      m.type = "T" + std::to_string(types[e]);
      doc.entities[e].push_back(std::move(m));
    }
  }
  return doc;
}

}  // namespace

std::vector<double> SynthConfig::resolved_priors() const {
  if (!priors.empty()) {
    if (priors.size() == 1) return std::vector<double>(relations, priors[0]);
    return priors;
  }
  std::vector<double> out(relations);
  for (std::size_t r = 0; r < relations; ++r) {
    const double t = relations > 1 ? static_cast<double>(r) / (relations - 1) : 0;
    out[r] = 0.12 - 0.08 * t;
  }
  return out;
}

double SynthConfig::keep_rate(std::size_t relation) const {
  if (keep_rates.empty()) return 1.0;
  if (keep_rates.size() == 1) return keep_rates[0];
  return keep_rates.at(relation - 1);
}

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.relations == 0) throw ConfigError("synth: relations must be >= 1");
  if (!(cfg.entity_noise >= 0.0)) throw ConfigError("synth: entity_noise must be >= 0");
  if (cfg.types == 0 || cfg.latent_dim == 0 || cfg.type_synonyms == 0) {
    throw ConfigError("synth: types, latent_dim, type_synonyms must be >= 1");
  }
  if (cfg.entities_min < 1 || cfg.entities_max < cfg.entities_min) {
    throw ConfigError("synth: need 1 <= entities_min <= entities_max");
  }
  if (cfg.name_pool < cfg.entities_max) {
    throw ConfigError("synth: name_pool smaller than entities_max");
  }
  if (cfg.sentences == 0 || cfg.mentions_max == 0 || cfg.filler_vocab == 0) {
    throw ConfigError("synth: sentences, mentions_max, filler_vocab >= 1");
  }
  const auto priors = cfg.resolved_priors();
  if (priors.size() != cfg.relations) {
    throw ConfigError("synth: " + std::to_string(priors.size()) +
                      " priors for " + std::to_string(cfg.relations) +
                      " relations");
  }
  for (double p : priors)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("synth: priors must be in (0,1)");
  if (cfg.keep_rates.size() > 1 && cfg.keep_rates.size() != cfg.relations) {
    throw ConfigError("synth: keep_rates must have 1 or R entries");
  }
  for (double k : cfg.keep_rates)
    if (!(k >= 0.0 && k <= 1.0)) throw ConfigError("synth: keep-rate outside [0,1]");
  if (!(cfg.distant_keep_rate >= 0.0 && cfg.distant_keep_rate <= 1.0) ||
      !(cfg.distant_noise >= 0.0 && cfg.distant_noise <= 1.0)) {
    throw ConfigError("synth: distant keep-rate / noise outside [0,1]");
  }
}

RealizedPriors count_priors(const Corpus& observed, const Corpus& oracle) {
  const std::size_t R = oracle.relations.size();
  RealizedPriors out;
  out.n_true.assign(R, 0);
  out.n_observed.assign(R, 0);
  for (const auto& doc : oracle.docs) {
    const std::size_t n = doc.entity_count();
    out.candidate_pairs += n * (n > 0 ? n - 1 : 0);
    for (const auto& t : doc.labels) ++out.n_true[t.relation - 1];
  }
  for (const auto& doc : observed.docs)
    for (const auto& t : doc.labels) ++out.n_observed[t.relation - 1];
  const double pairs = static_cast<double>(std::max<std::size_t>(1, out.candidate_pairs));
  for (std::size_t r = 0; r < R; ++r) {
    out.pi.push_back(static_cast<double>(out.n_true[r]) / pairs);
    out.pi_labeled.push_back(static_cast<double>(out.n_observed[r]) / pairs);
  }
  return out;
}

SynthCorpus synthesize_pu_corpus(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const World world = build_world(cfg);
  SynthCorpus result;
  std::vector<std::string> names;
  for (std::size_t r = 1; r <= cfg.relations; ++r) names.push_back("R" + std::to_string(r));
  result.relations = RelationSchema::from_names(names);
  result.thresholds = world.thresholds;

  const std::size_t counts[] = {cfg.train_docs, cfg.distant_docs, cfg.dev_docs,
                                cfg.test_docs};
  for (std::size_t s = 0; s < 4; ++s) {
    if (counts[s] == 0) continue;
    const std::string split = kSplitNames[s];
    const bool is_train = split == "train";
    const bool is_distant = split == "distant";
    const std::uint64_t split_seed = Rng::mix(cfg.seed, s);
    SynthSplit out;
    out.observed.relations = result.relations;
    out.oracle.relations = result.relations;
    for (std::size_t i = 0; i < counts[s]; ++i) {
      const std::uint64_t doc_seed = Rng::mix(split_seed, i);
      std::vector<std::vector<double>> latents;
      Document doc = make_document(cfg, world, split, i, doc_seed, latents);
      Document oracle = doc;
      for (const auto& [h, t] : enumerate_pairs(doc))
        for (std::size_t r = 1; r <= cfg.relations; ++r)
          if (world.holds(r, latents[h].data(), latents[t].data()))
            oracle.labels.push_back({h, t, r, Provenance::kSyntheticTrue});

      Rng label_rng(Rng::mix(doc_seed, 77));
      std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
      for (const auto& truth : oracle.labels) {
        RelationTriple obs = truth;
        obs.provenance =
            is_distant ? Provenance::kDistant : Provenance::kSyntheticObserved;
        if (is_train || is_distant) {
          const double keep =
              is_distant ? cfg.distant_keep_rate : cfg.keep_rate(truth.relation);
          if (!label_rng.bernoulli(keep)) continue;
        }
        if (is_distant && cfg.relations > 1 &&
            label_rng.bernoulli(cfg.distant_noise)) {
          std::size_t other = 1 + label_rng.below(cfg.relations - 1);
          if (other >= obs.relation) ++other;
          obs.relation = other;
        }
        if (seen.emplace(obs.head, obs.tail, obs.relation).second) {
          doc.labels.push_back(obs);
        }
      }
      out.observed.docs.push_back(std::move(doc));
      out.oracle.docs.push_back(std::move(oracle));
    }
    out.priors = count_priors(out.observed, out.oracle);
    result.splits.emplace(split, std::move(out));
  }
  return result;
}

}  // namespace memre
