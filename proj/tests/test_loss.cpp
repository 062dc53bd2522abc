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

#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "gradcheck.hpp"
#include "memre/errors.hpp"
#include "memre/loss.hpp"

namespace memre {
namespace {

const double kLn2 = std::numbers::ln2;

BatchScores make_batch(std::vector<std::vector<double>> scores,
                       std::vector<std::vector<int>> positive) {
  BatchScores b;
  b.scores = Tensor::matrix(scores, true);
  for (std::size_t p = 0; p < scores.size(); ++p) {
    for (std::size_t c = 0; c < scores[p].size(); ++c) {
      b.positive.push_back(positive[p][c] != 0);
      b.unlabeled.push_back(positive[p][c] == 0);
    }
  }
  return b;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST_CASE("prior shift") {
  CHECK(prior_shift(0.3, 0.3) == 0.0);
  CHECK(prior_shift(0.3, 0.0) == 0.3);
  CHECK(prior_shift(0.3, 0.1) == doctest::Approx(0.2 / 0.9).epsilon(1e-15));
  CHECK_THROWS_AS(prior_shift(0.2, 0.3), InvalidPriorError);
  CHECK_THROWS_AS(prior_shift(1.0, 1.0), InvalidPriorError);
  CHECK_THROWS_AS(prior_shift(0.5, -0.1), InvalidPriorError);
}

TEST_CASE("pn risk worked values") {
  const ClassPriorTable none;
  const LossConfig cfg;
  CHECK(pn_risk(make_batch({{0.0}, {0.0}}, {{1}, {0}}), none, cfg).item() ==
        doctest::Approx(2 * kLn2).epsilon(1e-15));
  CHECK(pn_risk(make_batch({{20.0}, {-20.0}}, {{1}, {0}}), none, cfg).item() <
        1e-8);
  const double one = pn_risk(make_batch({{0.3}, {-1.2}}, {{1}, {0}}), none, cfg).item();
  const double two =
      pn_risk(make_batch({{0.3, 0.3}, {-1.2, -1.2}}, {{1, 1}, {0, 0}}), none, cfg)
          .item();
  CHECK(std::abs(two - 2 * one) < 1e-15);
}

TEST_CASE("pu risk worked values") {
  const LossConfig cfg;
  const auto table = make_prior_table({0.5}, {0.0});
  CHECK(pu_risk(make_batch({{0.0}, {0.0}}, {{1}, {0}}), table, cfg).item() ==
        doctest::Approx(kLn2).epsilon(1e-15));
  // No positives: the unlabeled term alone.
  const auto b = make_batch({{0.4}, {-0.7}}, {{0}, {0}});
  const double want = (std::log1p(std::exp(0.4)) + std::log1p(std::exp(-0.7))) / 2;
  CHECK(pu_risk(b, table, cfg).item() == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(pu_risk(b, ClassPriorTable{}, cfg), ConfigError);
}

TEST_CASE("the clamp zeroes a negative second term") {
  // mean_U l(-1) small, pi * mean_P l(-1) large.
  const auto table = make_prior_table({0.9}, {0.0});
  const auto b = make_batch({{5.0}, {-6.0}}, {{1}, {0}});
  const auto rb = risk_breakdown(LossKind::kPU, b, table, LossConfig{});
  REQUIRE(rb.negative.size() == 1);
  CHECK(rb.negative[0] < 0.0);
  CHECK(rb.clamped[0] == 0.0);
  CHECK(rb.total == doctest::Approx(rb.positive[0]).epsilon(1e-15));
  LossConfig raw;
  raw.clamp_nonnegative = false;
  const auto unclamped = risk_breakdown(LossKind::kPU, b, table, raw);
  CHECK(unclamped.clamped[0] == unclamped.negative[0]);
}

TEST_CASE("ssr-pu reduces to pu bit-for-bit without labeled prior") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t P = 1 + rng.below(12), K = 1 + rng.below(6);
    std::vector<std::vector<double>> s(P, std::vector<double>(K));
    std::vector<std::vector<int>> pos(P, std::vector<int>(K));
    std::vector<double> pi(K), pl(K, 0.0);
    for (auto& row : s) for (auto& v : row) v = rng.uniform(-4, 4);
    for (auto& row : pos) for (auto& v : row) v = rng.bernoulli(0.3);
    for (auto& p : pi) p = rng.uniform(0.0, 0.95);
    const auto table = make_prior_table(pi, pl);
    const auto b = make_batch(s, pos);
    CHECK(bit_equal(ssr_pu_risk(b, table, LossConfig{}).item(),
                    pu_risk(b, table, LossConfig{}).item()));
  }
}

TEST_CASE("subtraction coefficient vanishes when fully labeled") {
  for (double pi : {0.01, 0.2, 0.5, 0.77}) {
    const auto table = make_prior_table({pi}, {pi});
    const auto coef = shift_coefficients(table.classes[0]);
    CHECK(coef.subtraction == 0.0);
    CHECK(coef.unlabeled == 1.0 - pi);
  }
}

TEST_CASE("ssr-pu worked example") {
  const auto table = make_prior_table({0.5}, {0.25});
  CHECK(std::abs(table.classes[0].pi_unlabeled - 1.0 / 3.0) < 1e-15);
  const auto coef = shift_coefficients(table.classes[0]);
  CHECK(std::abs(coef.unlabeled - 0.75) < 1e-15);
  CHECK(std::abs(coef.subtraction - 0.25) < 1e-15);
  const auto b = make_batch({{0.0}, {0.0}}, {{1}, {0}});
  CHECK(std::abs(ssr_pu_risk(b, table, LossConfig{}).item() - kLn2) < 1e-12);
}

TEST_CASE("gamma weight scales only the positive term") {
  const auto table = make_prior_table({0.2}, {0.1});
  const auto b = make_batch({{0.3}, {-0.2}}, {{1}, {0}});
  LossConfig plain, gamma;
  gamma.use_gamma_weight = true;
  const auto a = risk_breakdown(LossKind::kSSRPU, b, table, plain);
  const auto g = risk_breakdown(LossKind::kSSRPU, b, table, gamma);
  CHECK(g.positive[0] == doctest::Approx(a.positive[0] * 2.0).epsilon(1e-14));
  CHECK(g.clamped[0] == a.clamped[0]);
}

TEST_CASE("risks stay non-negative on random batches") {
  Rng rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t P = 1 + rng.below(8), K = 1 + rng.below(4);
    std::vector<std::vector<double>> s(P, std::vector<double>(K));
    std::vector<std::vector<int>> pos(P, std::vector<int>(K));
    std::vector<double> pi(K), pl(K);
    for (auto& row : s) for (auto& v : row) v = rng.uniform(-10, 10);
    for (auto& row : pos) for (auto& v : row) v = rng.bernoulli(0.5);
    for (std::size_t c = 0; c < K; ++c) {
      pi[c] = rng.uniform(0.0, 0.99);
      pl[c] = pi[c] * rng.uniform();
    }
    const auto table = make_prior_table(pi, pl);
    const auto b = make_batch(s, pos);
    for (auto kind : {LossKind::kPU, LossKind::kSSRPU}) {
      const auto rb = risk_breakdown(kind, b, table, LossConfig{});
      for (double v : rb.clamped) CHECK(v >= 0.0);
      CHECK(rb.total >= 0.0);
    }
  }
}

TEST_CASE("unclamped ssr-pu negative risk is unbiased") {
  // Scores depend only on the true label; labeled positives are a random
  // subset of positives, the rest stay in the unlabeled pool.
  const double pi = 0.3, keep = 0.4;
  LossConfig raw;
  raw.clamp_nonnegative = false;
  double est_sum = 0.0, truth_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(Rng::mix(seed, 5));
    const std::size_t n = 10000;
    std::vector<std::vector<double>> s(n, std::vector<double>(1));
    std::vector<std::vector<int>> pos(n, std::vector<int>(1));
    std::size_t labeled = 0, negatives = 0;
    double neg_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool y = rng.bernoulli(pi);
      s[i][0] = y ? rng.normal(1.0, 1.0) : rng.normal(-1.0, 1.0);
      pos[i][0] = y && rng.bernoulli(keep);
      labeled += pos[i][0];
      if (!y) {
        ++negatives;
        neg_loss += std::log1p(std::exp(s[i][0]));
      }
    }
    const double pl = static_cast<double>(labeled) / n;
    const auto table = make_prior_table({pi}, {pl});
    const auto rb = risk_breakdown(LossKind::kSSRPU, make_batch(s, pos), table, raw);
    est_sum += rb.negative[0];
    truth_sum += (1.0 - pi) * neg_loss / negatives;
  }
  CHECK(std::abs(est_sum - truth_sum) / truth_sum < 0.05);
}

TEST_CASE("risk gradients match finite differences") {
  Rng rng(2);
  for (const auto& c : testing::gradient_cases()) {
    if (c.name.find("risk") == std::string::npos) continue;
    CAPTURE(c.name);
    for (int point = 0; point < 20; ++point) CHECK(c.run(rng).failures == 0);
  }
}

TEST_CASE("risk input validation") {
  const auto table = make_prior_table({0.5}, {0.1});
  BatchScores empty;
  empty.scores = Tensor::zeros({0, 1});
  CHECK_THROWS(ssr_pu_risk(empty, table, LossConfig{}));
  auto b = make_batch({{0.0}}, {{1}});
  b.positive.push_back(0);
  CHECK_THROWS_AS(ssr_pu_risk(b, table, LossConfig{}), DimensionError);
  CHECK(parse_loss_kind("ssr-pu") == LossKind::kSSRPU);
  CHECK(std::string(loss_name(LossKind::kPN)) == "pn");
  CHECK_THROWS_AS(parse_loss_kind("nnpu"), ConfigError);
}

Corpus counting_corpus() {
  Corpus c;
  c.relations = RelationSchema::from_names({"a", "b", "c"});
  for (int d = 0; d < 2; ++d) {
    Document doc;
    doc.id = "d" + std::to_string(d);
    doc.sentences = {{"x", "y", "z", "w"}};
    for (std::size_t e = 0; e < 4; ++e) {
      doc.entities.push_back({{e, 0, e, e + 1, "e" + std::to_string(e), "T"}});
    }
    doc.labels = {{0, 1, 1}, {1, 2, 1}, {2, 3, 2}};
    if (d == 1) doc.labels.push_back({0, 1, 1});  // duplicate, counted once
    c.docs.push_back(doc);
  }
  return c;
}

TEST_CASE("prior estimation counts over all ordered pairs") {
  const Corpus c = counting_corpus();
  PriorAssumption a;
  a.per_class = {0.3, 0.3, 0.3};
  const auto t = estimate_priors(c, a);
  REQUIRE(t.size() == 3);
  // 2 docs x 12 ordered pairs.
  CHECK(t.classes[0].pi_labeled == doctest::Approx(4.0 / 24).epsilon(1e-15));
  CHECK(t.classes[0].n_positive == 4);
  CHECK(t.classes[0].n_unlabeled == 20);
  CHECK(t.classes[1].pi_labeled == doctest::Approx(2.0 / 24).epsilon(1e-15));
  CHECK(t.classes[2].pi_labeled == 0.0);  // empty class stays in the table
  CHECK(t.classes[2].pi_unlabeled == doctest::Approx(0.3).epsilon(1e-15));

  PriorAssumption exact;
  exact.inflation = 1.0;
  for (const auto& k : estimate_priors(c, exact).classes) {
    CHECK(k.pi_unlabeled == 0.0);
  }
  PriorAssumption low;
  low.global = 0.1;
  CHECK_THROWS_WITH_AS(estimate_priors(c, low), doctest::Contains("class 1"),
                       InvalidPriorError);
}

TEST_CASE("prior table file round trip") {
  const auto t = make_prior_table({0.3, 0.05}, {0.1, 0.0});
  const auto path = std::filesystem::temp_directory_path() / "memre_priors.tsv";
  write_prior_table(path, t);
  const auto back = read_prior_table(path);
  REQUIRE(back.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(bit_equal(back.classes[c].pi, t.classes[c].pi));
    CHECK(bit_equal(back.classes[c].pi_labeled, t.classes[c].pi_labeled));
    CHECK(bit_equal(back.classes[c].pi_unlabeled, t.classes[c].pi_unlabeled));
  }
}

}  // namespace
}  // namespace memre
