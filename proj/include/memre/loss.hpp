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

#ifndef MEMRE_LOSS_HPP_
#define MEMRE_LOSS_HPP_

// Risk estimators over per-class scores f_i: supervised PN, non-negative PU,
// and non-negative PU under class prior shift (SSR-PU). The surrogate is the
// logistic loss: l(z, +1) = softplus(-z), l(z, -1) = softplus(z).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memre/data.hpp"
#include "memre/tensor.hpp"

namespace memre {

enum class LossKind { kPN, kPU, kSSRPU };

const char* loss_name(LossKind kind);
LossKind parse_loss_kind(const std::string& name);  // pn | pu | ssr-pu

struct ClassPrior {
  double pi = 0.0;            // true positive prior
  double pi_labeled = 0.0;    // labeled-positive prior
  double pi_unlabeled = 0.0;  // positive rate inside the unlabeled pool
  std::size_t n_positive = 0;
  std::size_t n_unlabeled = 0;
};

// Index c holds relation c + 1.
struct ClassPriorTable {
  std::vector<ClassPrior> classes;

  std::size_t size() const { return classes.size(); }
};

// (pi - pi_labeled) / (1 - pi_labeled). Throws InvalidPriorError unless
// 0 <= pi_labeled <= pi < 1.
double prior_shift(double pi, double pi_labeled);

// Builds a table from priors, validating each class and deriving pi_u.
ClassPriorTable make_prior_table(const std::vector<double>& pi,
                                 const std::vector<double>& pi_labeled);

struct LossConfig {
  bool use_gamma_weight = false;
  bool clamp_nonnegative = true;
};

// Scores [P x K] with per-class labeled-positive and unlabeled masks (same
// layout). A pair is in exactly one of the two sets for each class unless
// unlabeled subsampling removed it.
struct BatchScores {
  Tensor scores;
  std::vector<std::uint8_t> positive;
  std::vector<std::uint8_t> unlabeled;

  std::size_t classes() const { return scores.cols(); }
  std::size_t n_positive(std::size_t c) const;
  std::size_t n_unlabeled(std::size_t c) const;
};

Tensor pn_risk(const BatchScores& batch, const ClassPriorTable& table,
               const LossConfig& cfg);
Tensor pu_risk(const BatchScores& batch, const ClassPriorTable& table,
               const LossConfig& cfg);
Tensor ssr_pu_risk(const BatchScores& batch, const ClassPriorTable& table,
                   const LossConfig& cfg);
Tensor risk(LossKind kind, const BatchScores& batch,
            const ClassPriorTable& table, const LossConfig& cfg);

// Per-class values of the two risk terms, for inspection and testing.
struct RiskBreakdown {
  std::vector<double> positive;   // weighted positive term
  std::vector<double> negative;   // second term before the clamp
  std::vector<double> clamped;    // second term as added to the total
  double total = 0.0;
};

RiskBreakdown risk_breakdown(LossKind kind, const BatchScores& batch,
                             const ClassPriorTable& table,
                             const LossConfig& cfg);

// Coefficients of the SSR-PU unlabeled and subtraction terms:
//   (1 - pi) / (1 - pi_u)  and  (pi_u - pi_u pi) / (1 - pi_u).
struct ShiftCoefficients {
  double unlabeled = 1.0;
  double subtraction = 0.0;
};
ShiftCoefficients shift_coefficients(const ClassPrior& prior);

// How the true prior pi is obtained when estimating from observed labels.
struct PriorAssumption {
  std::vector<double> per_class;  // explicit pi per class, if non-empty
  std::optional<double> global;   // single pi for every class
  double inflation = 1.0;         // otherwise pi = inflation * pi_labeled
};

// Counts labeled positives per class over all candidate ordered pairs.
ClassPriorTable estimate_priors(const Corpus& corpus,
                                const PriorAssumption& assumption);

// Tab-separated: class, pi, pi_labeled, pi_u, n_P, n_U with a header row.
void write_prior_table(const std::filesystem::path& path,
                       const ClassPriorTable& table);
ClassPriorTable read_prior_table(const std::filesystem::path& path);
std::string format_prior_table(const ClassPriorTable& table);

}  // namespace memre

#endif  // MEMRE_LOSS_HPP_
