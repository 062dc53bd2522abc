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

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memre/data.hpp"
#include "memre/encoder.hpp"
#include "memre/head.hpp"
#include "memre/loss.hpp"
#include "memre/memory.hpp"
#include "memre/model.hpp"

namespace memre::testing {

void GradCheckResult::merge(const GradCheckResult& other) {
  checked += other.checked;
  failures += other.failures;
  worst_abs = std::max(worst_abs, other.worst_abs);
  if (other.worst_rel > worst_rel) {
    worst_rel = other.worst_rel;
    worst_where = other.worst_where;
  }
}

GradCheckResult check_gradients(const ScalarFn& loss_fn,
                                const std::vector<Tensor>& inputs, Rng& rng,
                                std::size_t max_coords) {
  for (const auto& t : inputs) {
    Tensor handle = t;
    handle.zero_grad();
  }
  backward(loss_fn());

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < inputs[i].numel(); ++j) coords.emplace_back(i, j);
  }
  if (max_coords > 0 && coords.size() > max_coords) {
    for (std::size_t k = 0; k < max_coords; ++k) {
      std::swap(coords[k], coords[k + rng.below(coords.size() - k)]);
    }
    coords.resize(max_coords);
  }

  GradCheckResult result;
  NoGradGuard no_grad;
  for (const auto& [i, j] : coords) {
    Tensor handle = inputs[i];
    auto values = handle.mutable_values();
    const double saved = values[j];
    values[j] = saved + kFdStep;
    const double up = loss_fn().item();
    values[j] = saved - kFdStep;
    const double down = loss_fn().item();
    values[j] = saved;

    const double numeric = (up - down) / (2.0 * kFdStep);
    const double analytic = handle.has_grad() ? handle.grad()[j] : 0.0;
    const double diff = std::abs(analytic - numeric);
    ++result.checked;
    result.worst_abs = std::max(result.worst_abs, diff);
    const double magnitude = std::max(std::abs(analytic), std::abs(numeric));
    if (magnitude <= kAbsFloor) continue;
    const double rel = diff / magnitude;
    if (rel > result.worst_rel) {
      result.worst_rel = rel;
      result.worst_where = "input " + std::to_string(i) + "[" +
                           std::to_string(j) + "] analytic " +
                           std::to_string(analytic) + " numeric " +
                           std::to_string(numeric);
    }
    if (diff <= kAbsFloor) continue;
    if (rel > kRelTolerance) ++result.failures;
  }
  return result;
}

Tensor random_tensor(Shape shape, Rng& rng, double scale, bool requires_grad,
                     double min_abs) {
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) {
    do {
      v = rng.uniform(-scale, scale);
    } while (std::abs(v) < min_abs);
  }
  return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

Tensor project(const Tensor& out, const Tensor& weights) {
  return sum(mul(out, weights));
}

namespace {

Tensor weights_like(const Tensor& t, Rng& rng) {
  return random_tensor(t.shape(), rng, 1.0, false);
}

// Wraps an op on random leaves into a projected scalar check.
GradCheckResult check_op(const std::function<Tensor()>& op,
                         const std::vector<Tensor>& leaves, Rng& rng) {
  Tensor w;
  {
    NoGradGuard g;
    w = weights_like(op(), rng);
  }
  return check_gradients([&] { return project(op(), w); }, leaves, rng);
}

using Op = std::function<Tensor(const std::vector<Tensor>&)>;

GradCase unary_case(const std::string& name, Shape shape, Op op,
                    double min_abs = 0.0) {
  return {name, [=](Rng& rng) {
            std::vector<Tensor> in = {random_tensor(shape, rng, 2.0, true, min_abs)};
            return check_op([&] { return op(in); }, in, rng);
          }};
}

GradCase multi_case(const std::string& name, std::vector<Shape> shapes, Op op) {
  return {name, [=](Rng& rng) {
            std::vector<Tensor> in;
            for (const auto& s : shapes) in.push_back(random_tensor(s, rng));
            return check_op([&] { return op(in); }, in, rng);
          }};
}

SummarizerParams random_summarizer(std::size_t d, std::size_t h, Rng& rng) {
  return {random_tensor({d, h}, rng), random_tensor({h}, rng),
          random_tensor({h, kReadOutputs}, rng),
          random_tensor({kReadOutputs}, rng)};
}

void append_summarizer(std::vector<Tensor>& leaves, const SummarizerParams& p) {
  leaves.insert(leaves.end(), {p.w1, p.b1, p.w2, p.b2});
}

BatchScores random_batch(std::size_t pairs, std::size_t classes, Rng& rng) {
  BatchScores batch;
  batch.scores = random_tensor({pairs, classes}, rng, 3.0);
  batch.positive.resize(pairs * classes);
  batch.unlabeled.resize(pairs * classes);
  for (std::size_t i = 0; i < pairs * classes; ++i) {
    const bool pos = rng.bernoulli(0.3);
    batch.positive[i] = pos;
    batch.unlabeled[i] = !pos;
  }
  return batch;
}

ClassPriorTable random_priors(std::size_t classes, Rng& rng) {
  std::vector<double> pi(classes), pl(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    pi[c] = rng.uniform(0.05, 0.6);
    pl[c] = pi[c] * rng.uniform(0.0, 0.9);
  }
  return make_prior_table(pi, pl);
}

GradCase risk_case(const std::string& name, LossKind kind, bool gamma) {
  return {name, [=](Rng& rng) {
            const BatchScores batch = random_batch(6, 3, rng);
            const ClassPriorTable table = random_priors(3, rng);
            LossConfig cfg;
            cfg.use_gamma_weight = gamma;
            return check_gradients(
                [&] { return risk(kind, batch, table, cfg); }, {batch.scores},
                rng);
          }};
}

Document gradcheck_document() {
  Document doc;
  doc.id = "g0";
  doc.sentences = {{"alpha", "met", "beta", "in", "gamma", "city"},
                   {"beta", "left", "for", "delta", "with", "alpha"}};
  doc.entities = {
      {{0, 0, 0, 1, "alpha", "PER"}, {0, 1, 5, 6, "alpha", "PER"}},
      {{1, 0, 2, 3, "beta", "PER"}, {1, 1, 0, 1, "beta", "PER"}},
      {{2, 0, 4, 6, "gamma city", "LOC"}},
      {{3, 1, 3, 4, "delta", "LOC"}}};
  return doc;
}

GradCase pair_forward_case(std::size_t encoder_layers, std::size_t memory) {
  const std::string name = "forward_pair[enc=" + std::to_string(encoder_layers) +
                           ",m=" + std::to_string(memory) + "]";
  return {name, [=](Rng& rng) {
            Corpus corpus;
            corpus.docs.push_back(gradcheck_document());
            const Vocabulary vocab = Vocabulary::build({&corpus});
            ModelConfig cfg;
            cfg.vocab_size = vocab.size();
            cfg.relations = 3;
            cfg.dim = 8;
            cfg.heads = 2;
            cfg.groups = 2;
            cfg.encoder_layers = encoder_layers;
            cfg.memory_size = memory;
            cfg.read_layers = 2;
            cfg.read_hidden = 4;
            cfg.seed = rng.next();
            Model model = init_model(cfg);
            std::vector<Tensor> leaves;
            for (const auto& [pname, t] : model.params.entries()) {
              Tensor handle = t;
              for (auto& v : handle.mutable_values()) v = rng.uniform(-0.5, 0.5);
              leaves.push_back(t);
            }
            const PreparedDocument doc = prepare_document(corpus.docs[0], vocab);
            const std::size_t h = rng.below(4);
            const std::size_t t = (h + 1 + rng.below(3)) % 4;
            Tensor w;
            {
              NoGradGuard g;
              w = weights_like(forward_pair(model, doc, h, t).scores, rng);
            }
            return check_gradients(
                [&] { return project(forward_pair(model, doc, h, t).scores, w); },
                leaves, rng, 24);
          }};
}

}  // namespace

std::vector<GradCase> gradient_cases() {
  std::vector<GradCase> cases;
  cases.push_back(multi_case("matmul", {{3, 4}, {4, 2}},
                             [](auto& in) { return matmul(in[0], in[1]); }));
  cases.push_back(unary_case("transpose", {3, 4},
                             [](auto& in) { return transpose(in[0]); }));
  cases.push_back(multi_case("affine", {{3, 4}, {4, 2}, {2}}, [](auto& in) {
    return affine(in[0], in[1], in[2]);
  }));
  cases.push_back(multi_case("add", {{3, 4}, {3, 4}},
                             [](auto& in) { return add(in[0], in[1]); }));
  cases.push_back(multi_case("sub", {{3, 4}, {3, 4}},
                             [](auto& in) { return sub(in[0], in[1]); }));
  cases.push_back(multi_case("mul", {{3, 4}, {3, 4}},
                             [](auto& in) { return mul(in[0], in[1]); }));
  cases.push_back(unary_case("scale", {3, 4},
                             [](auto& in) { return scale(in[0], -1.7); }));
  cases.push_back(unary_case("neg", {5}, [](auto& in) { return neg(in[0]); }));
  cases.push_back(unary_case("sigmoid", {3, 4},
                             [](auto& in) { return sigmoid(in[0]); }));
  cases.push_back(unary_case("softplus", {3, 4},
                             [](auto& in) { return softplus(in[0]); }));
  cases.push_back(unary_case("softplus-wide", {6}, [](auto& in) {
    return softplus(scale(in[0], 20.0));
  }));
  cases.push_back(unary_case("tanh", {3, 4},
                             [](auto& in) { return tanh(in[0]); }));
  // Kept away from the kink so the central difference is well defined.
  cases.push_back(unary_case("relu", {3, 4},
                             [](auto& in) { return relu(in[0]); }, 1e-3));
  cases.push_back(multi_case("add_row", {{3, 4}, {4}},
                             [](auto& in) { return add_row(in[0], in[1]); }));
  cases.push_back(multi_case("add_tiled_rows", {{6, 2}, {3, 2}}, [](auto& in) {
    return add_tiled_rows(in[0], in[1]);
  }));
  cases.push_back(unary_case("sum", {3, 4}, [](auto& in) { return sum(in[0]); }));
  cases.push_back(unary_case("mean", {3, 4}, [](auto& in) { return mean(in[0]); }));
  cases.push_back(unary_case("logsumexp_rows", {4, 3},
                             [](auto& in) { return logsumexp_rows(in[0]); }));
  cases.push_back(unary_case("row_softmax", {3, 5},
                             [](auto& in) { return row_softmax(in[0]); }));
  cases.push_back(unary_case("layer_norm", {3, 5},
                             [](auto& in) { return layer_norm(in[0]); }));
  cases.push_back({"masked_column_mean", [](Rng& rng) {
                     std::vector<Tensor> in = {random_tensor({5, 3}, rng)};
                     std::vector<std::uint8_t> mask(15);
                     for (auto& m : mask) m = rng.bernoulli(0.5);
                     return check_op(
                         [&] { return masked_column_mean(in[0], mask); }, in, rng);
                   }});
  cases.push_back(multi_case("concat_rows", {{2, 3}, {4, 3}}, [](auto& in) {
    return concat_rows(in[0], in[1]);
  }));
  cases.push_back({"gather_rows", [](Rng& rng) {
                     std::vector<Tensor> in = {random_tensor({4, 3}, rng)};
                     std::vector<std::size_t> index(6);
                     for (auto& i : index) i = rng.below(4);  // repeats allowed
                     return check_op([&] { return gather_rows(in[0], index); },
                                     in, rng);
                   }});
  cases.push_back(unary_case("reshape", {3, 4},
                             [](auto& in) { return reshape(in[0], {2, 6}); }));
  cases.push_back(multi_case("interleave_rows", {{4, 3}, {6, 3}}, [](auto& in) {
    return interleave_rows(in[0], 2, in[1], 3);
  }));
  cases.push_back(multi_case(
      "shared_prefix_pool", {{4, 3}, {4, 2}, {6, 3}, {6, 2}}, [](auto& in) {
        return shared_prefix_pool(in[0], in[1], in[2], in[3], 2);
      }));
  cases.push_back({"importance_scores", [](Rng& rng) {
                     std::vector<Tensor> in = {random_tensor({5, 4}, rng)};
                     const auto mlp = random_summarizer(4, 3, rng);
                     append_summarizer(in, mlp);
                     return check_op([&] { return importance_scores(in[0], mlp); },
                                     in, rng);
                   }});
  cases.push_back({"summarize", [](Rng& rng) {
                     std::vector<Tensor> in = {random_tensor({5, 4}, rng)};
                     const auto mlp = random_summarizer(4, 3, rng);
                     append_summarizer(in, mlp);
                     return check_op([&] { return summarize(in[0], mlp).summary; },
                                     in, rng);
                   }});
  cases.push_back({"read", [](Rng& rng) {
                     MemoryState mem{random_tensor({3, 4}, rng),
                                     random_tensor({5, 4}, rng), false};
                     std::vector<Tensor> in = {random_tensor({2, 4}, rng),
                                               mem.tokens, mem.positions};
                     std::vector<SummarizerParams> layers;
                     for (int l = 0; l < 2; ++l) {
                       layers.push_back(random_summarizer(4, 3, rng));
                       append_summarizer(in, layers.back());
                     }
                     return check_op(
                         [&] { return read(mem, in[0], layers).summary; }, in, rng);
                   }});
  cases.push_back({"read_batch", [](Rng& rng) {
                     MemoryState mem{random_tensor({3, 4}, rng),
                                     random_tensor({5, 4}, rng), false};
                     std::vector<Tensor> in = {random_tensor({6, 4}, rng),
                                               mem.tokens, mem.positions};
                     std::vector<SummarizerParams> layers;
                     for (int l = 0; l < 3; ++l) {
                       layers.push_back(random_summarizer(4, 3, rng));
                       append_summarizer(in, layers.back());
                     }
                     return check_op([&] { return read_batch(mem, in[0], layers); },
                                     in, rng);
                   }});
  cases.push_back({"pool_entity", [](Rng& rng) {
                     std::vector<Tensor> in = {random_tensor({7, 4}, rng)};
                     const std::vector<TokenSpan> spans = {{1, 3}, {4, 5}, {6, 7}};
                     return check_op(
                         [&] { return pool_entity(in[0], spans).vector; }, in, rng);
                   }});
  cases.push_back({"group_bilinear_logits", [](Rng& rng) {
                     BilinearHead head{2, 3, random_tensor({4, 2, 3, 3}, rng)};
                     std::vector<Tensor> in = {random_tensor({5, 6}, rng),
                                               random_tensor({5, 6}, rng),
                                               head.blocks};
                     return check_op(
                         [&] { return group_bilinear_logits(in[0], in[1], head); },
                         in, rng);
                   }});
  cases.push_back(unary_case("class_scores", {3, 5},
                             [](auto& in) { return class_scores(in[0]); }));
  cases.push_back(risk_case("pn_risk", LossKind::kPN, false));
  cases.push_back(risk_case("pu_risk", LossKind::kPU, false));
  cases.push_back(risk_case("ssr_pu_risk", LossKind::kSSRPU, false));
  cases.push_back(risk_case("ssr_pu_risk[gamma]", LossKind::kSSRPU, true));
  cases.push_back(pair_forward_case(0, 0));
  cases.push_back(pair_forward_case(0, 3));
  cases.push_back(pair_forward_case(1, 3));
  cases.push_back(pair_forward_case(2, 3));
  return cases;
}

}  // namespace memre::testing
