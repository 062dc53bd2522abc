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

#include "oracles.hpp"

namespace memre::testing {

PRF oracle_prf(const std::vector<Fact>& preds, const std::vector<Fact>& gold) {
  PRF r;
  r.predicted = preds.size();
  r.gold = gold.size();
  for (const auto& p : preds) {
    for (const auto& g : gold) {
      if (p.doc == g.doc && p.head == g.head && p.tail == g.tail &&
          p.relation == g.relation) {
        ++r.correct;
        break;
      }
    }
  }
  r.precision = r.predicted ? double(r.correct) / r.predicted : 0.0;
  r.recall = r.gold ? double(r.correct) / r.gold : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::vector<Fact> oracle_without(const std::vector<Fact>& facts,
                                 const DistantSet& distant) {
  std::vector<Fact> out;
  for (const auto& f : facts) {
    bool seen = false;
    for (const auto& [h, t, r] : distant) {
      if (h == f.head_name && t == f.tail_name && r == f.relation) seen = true;
    }
    if (!seen) out.push_back(f);
  }
  return out;
}

std::vector<std::size_t> oracle_decode(const std::vector<double>& scores) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0.0) out.push_back(i + 1);
  }
  return out;
}

Fact random_fact(Rng& rng) {
  Fact f;
  f.doc = "d" + std::to_string(rng.below(3));
  f.head = rng.below(4);
  f.tail = rng.below(4);
  f.relation = 1 + rng.below(3);
  f.head_name = "n" + std::to_string(f.head % 3);
  f.tail_name = "n" + std::to_string(f.tail % 3);
  return f;
}

PredictionSet random_fact_set(Rng& rng, std::size_t max) {
  PredictionSet s;
  const std::size_t n = rng.below(max + 1);
  for (std::size_t i = 0; i < n; ++i) s.insert(random_fact(rng));
  return s;
}

bool same_prf(const PRF& a, const PRF& b) {
  return a.correct == b.correct && a.predicted == b.predicted &&
         a.gold == b.gold && a.precision == b.precision &&
         a.recall == b.recall && a.f1 == b.f1;
}

}  // namespace memre::testing
