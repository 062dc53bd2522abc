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

#ifndef MEMRE_TESTS_ORACLES_HPP_
#define MEMRE_TESTS_ORACLES_HPP_

// Brute-force reference implementations: linear scans over plain vectors,
// sharing no code with the library.

#include <vector>

#include "memre/metrics.hpp"
#include "memre/rng.hpp"

namespace memre::testing {

PRF oracle_prf(const std::vector<Fact>& preds, const std::vector<Fact>& gold);

// Facts whose (head name, tail name, relation) is not in `distant`.
std::vector<Fact> oracle_without(const std::vector<Fact>& facts,
                                 const DistantSet& distant);

std::vector<std::size_t> oracle_decode(const std::vector<double>& scores);

// Small universe so that random sets overlap.
Fact random_fact(Rng& rng);
PredictionSet random_fact_set(Rng& rng, std::size_t max);

bool same_prf(const PRF& a, const PRF& b);

}  // namespace memre::testing

#endif  // MEMRE_TESTS_ORACLES_HPP_
