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

#ifndef MEMRE_METRICS_HPP_
#define MEMRE_METRICS_HPP_

// Micro precision / recall / F1 over (doc, head, tail, relation) facts, the
// Ign variant that discards facts seen in distant training data, and top-K
// frequency splits.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "memre/data.hpp"

namespace memre {

// Identity is (doc, head, tail, relation); names ride along for Ign matching.
struct Fact {
  std::string doc;
  std::size_t head = 0;
  std::size_t tail = 0;
  std::size_t relation = 0;
  std::string head_name;
  std::string tail_name;

  friend bool operator<(const Fact& a, const Fact& b) {
    return std::tie(a.doc, a.head, a.tail, a.relation) <
           std::tie(b.doc, b.head, b.tail, b.relation);
  }
  friend bool operator==(const Fact& a, const Fact& b) {
    return !(a < b) && !(b < a);
  }
};

using PredictionSet = std::set<Fact>;

// (head name, tail name, relation).
using NamedTriple = std::tuple<std::string, std::string, std::size_t>;
using DistantSet = std::set<NamedTriple>;

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Throws PreconditionError on empty gold. P = 0 when nothing is predicted;
// F1 = 0 when P + R = 0.
PRF micro_prf(const PredictionSet& preds, const PredictionSet& gold);

// micro_prf after removing from both sides every fact whose
// (head name, tail name, relation) is in `distant`.
PRF ign_f1(const PredictionSet& preds, const PredictionSet& gold,
           const DistantSet& distant);

PredictionSet gold_facts(const Corpus& corpus);
DistantSet distant_triples(const Corpus& corpus);

struct TopKSplit {
  std::set<std::size_t> top;
  std::set<std::size_t> rest;
};

// Relations 1..relations ranked by gold frequency, ties to the lower id.
TopKSplit topk_split(const PredictionSet& gold, std::size_t k,
                     std::size_t relations);

PredictionSet restrict_relations(const PredictionSet& facts,
                                 const std::set<std::size_t>& relations);

struct ClassCounts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

struct SubReport {
  std::vector<std::size_t> relations;
  std::optional<PRF> metrics;  // absent when the side has no gold facts
};

struct MetricReport {
  PRF overall;
  PRF ign;
  std::vector<ClassCounts> per_class;  // index r - 1
  std::optional<std::size_t> topk;
  std::optional<SubReport> top;
  std::optional<SubReport> rest;
};

MetricReport make_report(const PredictionSet& preds, const PredictionSet& gold,
                         std::size_t relations,
                         const DistantSet* distant = nullptr,
                         std::optional<std::size_t> topk = std::nullopt);

std::string report_to_json(const MetricReport& report);

}  // namespace memre

#endif  // MEMRE_METRICS_HPP_
