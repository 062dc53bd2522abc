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

#include "memre/loss.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "memre/errors.hpp"

namespace memre {
namespace {

struct TermTensors {
  Tensor positive;  // [K]
  Tensor negative;  // [K], before clamp
  Tensor clamped;   // [K]
};

void check_batch(const BatchScores& batch, const ClassPriorTable& table,
                 bool need_priors) {
  detail::require_2d(batch.scores, "risk");
  const std::size_t n = batch.scores.numel();
  if (batch.positive.size() != n || batch.unlabeled.size() != n) {
    throw DimensionError("risk: mask size does not match scores");
  }
  if (batch.scores.rows() == 0) throw PreconditionError("risk: empty batch");
  if (need_priors && table.size() != batch.classes()) {
    throw ConfigError("risk: prior table has " + std::to_string(table.size()) +
                      " classes, scores have " +
                      std::to_string(batch.classes()));
  }
}

Tensor constant(std::vector<double> values) {
  return Tensor::vector(std::move(values));
}

// pos_coef * mean_P l(+1) + [unl_coef * mean_U l(-1) - sub_coef * mean_P l(-1)]
TermTensors nonnegative_terms(const BatchScores& batch,
                              const std::vector<double>& pos_coef,
                              const std::vector<double>& unl_coef,
                              const std::vector<double>& sub_coef,
                              bool clamp) {
  const Tensor loss_pos = softplus(neg(batch.scores));
  const Tensor loss_neg = softplus(batch.scores);
  const Tensor p_plus = masked_column_mean(loss_pos, batch.positive);
  const Tensor p_minus = masked_column_mean(loss_neg, batch.positive);
  const Tensor u_minus = masked_column_mean(loss_neg, batch.unlabeled);
  TermTensors terms;
  terms.positive = mul(p_plus, constant(pos_coef));
  terms.negative = sub(mul(u_minus, constant(unl_coef)),
                       mul(p_minus, constant(sub_coef)));
  terms.clamped = clamp ? relu(terms.negative) : terms.negative;
  return terms;
}

TermTensors terms_for(LossKind kind, const BatchScores& batch,
                      const ClassPriorTable& table, const LossConfig& cfg) {
  check_batch(batch, table, kind != LossKind::kPN);
  const std::size_t K = batch.classes();
  if (kind == LossKind::kPN) {
    const Tensor loss_pos = softplus(neg(batch.scores));
    const Tensor loss_neg = softplus(batch.scores);
    TermTensors terms;
    terms.positive = masked_column_mean(loss_pos, batch.positive);
    terms.negative = masked_column_mean(loss_neg, batch.unlabeled);
    terms.clamped = terms.negative;
    return terms;
  }
  std::vector<double> pos(K), unl(K), subc(K);
  for (std::size_t c = 0; c < K; ++c) {
    const auto& prior = table.classes[c];
    if (kind == LossKind::kPU) {
      pos[c] = prior.pi;
      unl[c] = 1.0;
      subc[c] = prior.pi;
    } else {
      const auto coef = shift_coefficients(prior);
      pos[c] = prior.pi;
      if (cfg.use_gamma_weight && prior.pi > 0.0) {
        pos[c] *= std::sqrt((1.0 - prior.pi) / prior.pi);
      }
      unl[c] = coef.unlabeled;
      subc[c] = coef.subtraction;
    }
  }
  return nonnegative_terms(batch, pos, unl, subc, cfg.clamp_nonnegative);
}

}  // namespace

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kPN:
      return "pn";
    case LossKind::kPU:
      return "pu";
    case LossKind::kSSRPU:
      return "ssr-pu";
  }
  return "pn";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "pn" || name == "PN") return LossKind::kPN;
  if (name == "pu" || name == "PU") return LossKind::kPU;
  if (name == "ssr-pu" || name == "SSR-PU" || name == "ssrpu") {
    return LossKind::kSSRPU;
  }
  throw ConfigError("unknown loss '" + name + "' (expected pn|pu|ssr-pu)");
}

double prior_shift(double pi, double pi_labeled) {
  if (!(pi_labeled >= 0.0)) {
    throw InvalidPriorError("pi_labeled must be >= 0");
  }
  if (pi_labeled >= 1.0) throw InvalidPriorError("pi_labeled must be < 1");
  if (pi_labeled > pi) {
    throw InvalidPriorError("pi_labeled " + std::to_string(pi_labeled) +
                            " exceeds pi " + std::to_string(pi));
  }
  if (!(pi < 1.0)) throw InvalidPriorError("pi must be < 1");
  return (pi - pi_labeled) / (1.0 - pi_labeled);
}

ShiftCoefficients shift_coefficients(const ClassPrior& prior) {
  if (!(prior.pi_unlabeled < 1.0)) {
    throw InvalidPriorError("pi_u = 1 makes the shifted risk undefined");
  }
  // Written so that pi_u == pi gives exactly (1, pi) and pi_u == 0 gives
  // exactly (1 - pi, 0).
  const double ratio = (1.0 - prior.pi) / (1.0 - prior.pi_unlabeled);
  return {ratio, prior.pi_unlabeled * ratio};
}

ClassPriorTable make_prior_table(const std::vector<double>& pi,
                                 const std::vector<double>& pi_labeled) {
  if (pi.size() != pi_labeled.size()) {
    throw ConfigError("prior table: pi and pi_labeled sizes differ");
  }
  ClassPriorTable table;
  for (std::size_t c = 0; c < pi.size(); ++c) {
    ClassPrior prior;
    prior.pi = pi[c];
    prior.pi_labeled = pi_labeled[c];
    try {
      prior.pi_unlabeled = prior_shift(pi[c], pi_labeled[c]);
    } catch (const InvalidPriorError& e) {
      throw InvalidPriorError("class " + std::to_string(c + 1) + ": " +
                              e.what());
    }
    table.classes.push_back(prior);
  }
  return table;
}

std::size_t BatchScores::n_positive(std::size_t c) const {
  std::size_t n = 0;
  const std::size_t K = classes();
  for (std::size_t p = 0; p < scores.rows(); ++p) n += positive[p * K + c];
  return n;
}

std::size_t BatchScores::n_unlabeled(std::size_t c) const {
  std::size_t n = 0;
  const std::size_t K = classes();
  for (std::size_t p = 0; p < scores.rows(); ++p) n += unlabeled[p * K + c];
  return n;
}

Tensor pn_risk(const BatchScores& batch, const ClassPriorTable& table,
               const LossConfig& cfg) {
  return risk(LossKind::kPN, batch, table, cfg);
}

Tensor pu_risk(const BatchScores& batch, const ClassPriorTable& table,
               const LossConfig& cfg) {
  return risk(LossKind::kPU, batch, table, cfg);
}

Tensor ssr_pu_risk(const BatchScores& batch, const ClassPriorTable& table,
                   const LossConfig& cfg) {
  return risk(LossKind::kSSRPU, batch, table, cfg);
}

Tensor risk(LossKind kind, const BatchScores& batch,
            const ClassPriorTable& table, const LossConfig& cfg) {
  const auto terms = terms_for(kind, batch, table, cfg);
  return sum(add(terms.positive, terms.clamped));
}

RiskBreakdown risk_breakdown(LossKind kind, const BatchScores& batch,
                             const ClassPriorTable& table,
                             const LossConfig& cfg) {
  NoGradGuard no_grad;
  const auto terms = terms_for(kind, batch, table, cfg);
  RiskBreakdown out;
  out.positive.assign(terms.positive.values().begin(), terms.positive.values().end());
  out.negative.assign(terms.negative.values().begin(), terms.negative.values().end());
  out.clamped.assign(terms.clamped.values().begin(), terms.clamped.values().end());
  out.total = sum(add(terms.positive, terms.clamped)).item();
  return out;
}

ClassPriorTable estimate_priors(const Corpus& corpus,
                                const PriorAssumption& assumption) {
  const std::size_t R = corpus.relations.size();
  std::vector<std::size_t> positives(R, 0);
  std::size_t pairs = 0;
  for (const auto& doc : corpus.docs) {
    const std::size_t n = doc.entity_count();
    pairs += n * (n > 0 ? n - 1 : 0);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (const auto& t : doc.labels) {
      if (seen.emplace(t.head, t.tail, t.relation).second) {
        ++positives[t.relation - 1];
      }
    }
  }
  if (!assumption.per_class.empty() && assumption.per_class.size() != R) {
    throw ConfigError("estimate_priors: " +
                      std::to_string(assumption.per_class.size()) +
                      " priors for " + std::to_string(R) + " classes");
  }
  const double denom = static_cast<double>(pairs > 0 ? pairs : 1);
  std::vector<double> pi(R), pi_labeled(R);
  for (std::size_t c = 0; c < R; ++c) {
    pi_labeled[c] = static_cast<double>(positives[c]) / denom;
    if (!assumption.per_class.empty()) {
      pi[c] = assumption.per_class[c];
    } else if (assumption.global) {
      pi[c] = *assumption.global;
    } else {
      pi[c] = pi_labeled[c] * assumption.inflation;
    }
  }
  ClassPriorTable table;
  for (std::size_t c = 0; c < R; ++c) {
    if (pi_labeled[c] > pi[c]) {
      throw InvalidPriorError("class " + std::to_string(c + 1) + " (" +
                              corpus.relations.name(c + 1) + "): pi_labeled " +
                              std::to_string(pi_labeled[c]) + " > pi " +
                              std::to_string(pi[c]));
    }
  }
  table = make_prior_table(pi, pi_labeled);
  for (std::size_t c = 0; c < R; ++c) {
    table.classes[c].n_positive = positives[c];
    table.classes[c].n_unlabeled = pairs - positives[c];
  }
  return table;
}

std::string format_prior_table(const ClassPriorTable& table) {
  std::ostringstream os;
  os << "class\tpi\tpi_labeled\tpi_u\tn_P\tn_U\n";
  char buf[256];
  for (std::size_t c = 0; c < table.size(); ++c) {
    const auto& p = table.classes[c];
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\t%.17g\t%zu\t%zu\n",
                  c + 1, p.pi, p.pi_labeled, p.pi_unlabeled, p.n_positive,
                  p.n_unlabeled);
    os << buf;
  }
  return os.str();
}

void write_prior_table(const std::filesystem::path& path,
                       const ClassPriorTable& table) {
  write_file(path, format_prior_table(table));
}

ClassPriorTable read_prior_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line.rfind("class\t", 0) != 0) {
    throw ParseError(path.string() + ": missing prior table header");
  }
  ClassPriorTable table;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t cls = 0;
    ClassPrior p;
    if (!(fields >> cls >> p.pi >> p.pi_labeled >> p.pi_unlabeled >>
          p.n_positive >> p.n_unlabeled)) {
      throw ParseError(path.string() + ": bad row " + std::to_string(row));
    }
    if (cls != table.size() + 1) {
      throw ParseError(path.string() + ": classes out of order at row " +
                       std::to_string(row));
    }
    // Re-derive through the validated path so a hand-edited file cannot
    // smuggle in an inconsistent pi_u.
    p.pi_unlabeled = prior_shift(p.pi, p.pi_labeled);
    table.classes.push_back(p);
  }
  return table;
}

}  // namespace memre
