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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "memre/cli.hpp"
#include "memre/config.hpp"
#include "memre/errors.hpp"
#include "memre/evalx.hpp"
#include "memre/loss.hpp"
#include "memre/metrics.hpp"
#include "memre/pipeline.hpp"

namespace py = pybind11;

namespace memre {
namespace {

using Rows = std::vector<std::vector<double>>;
using Mask = std::vector<std::vector<bool>>;

BatchScores to_batch(const Rows& scores, const Mask& positive) {
  if (scores.size() != positive.size()) {
    throw DimensionError("scores and positive have different row counts");
  }
  BatchScores b;
  b.scores = Tensor::matrix(scores);
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (positive[p].size() != scores[p].size()) {
      throw DimensionError("row " + std::to_string(p) + ": mask width differs");
    }
    for (bool v : positive[p]) {
      b.positive.push_back(v);
      b.unlabeled.push_back(!v);
    }
  }
  return b;
}

double risk_value(const std::string& kind, const Rows& scores,
                  const Mask& positive, const std::vector<double>& pi,
                  const std::vector<double>& pi_labeled, bool gamma,
                  bool clamp) {
  LossConfig cfg;
  cfg.use_gamma_weight = gamma;
  cfg.clamp_nonnegative = clamp;
  const LossKind k = parse_loss_kind(kind);
  const ClassPriorTable table =
      k == LossKind::kPN && pi.empty() ? ClassPriorTable{}
                                       : make_prior_table(pi, pi_labeled);
  NoGradGuard no_grad;
  return risk(k, to_batch(scores, positive), table, cfg).item();
}

using FactTuple = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;

PredictionSet to_facts(const std::vector<FactTuple>& tuples) {
  PredictionSet out;
  for (const auto& [doc, h, t, r] : tuples) out.insert(Fact{doc, h, t, r, "", ""});
  return out;
}

py::dict prf_dict(const PRF& p) {
  py::dict d;
  d["precision"] = p.precision;
  d["recall"] = p.recall;
  d["f1"] = p.f1;
  d["correct"] = p.correct;
  d["predicted"] = p.predicted;
  d["gold"] = p.gold;
  return d;
}

py::dict corpus_stats(const std::string& path) {
  const Corpus c = load_corpus(path);
  double entities = 0.0, triples = 0.0;
  for (const auto& d : c.docs) {
    entities += d.entity_count();
    triples += d.labels.size();
  }
  const double n = c.docs.empty() ? 1.0 : static_cast<double>(c.docs.size());
  py::dict out;
  out["docs"] = c.docs.size();
  out["relations"] = c.relations.names();
  out["mean_entities"] = entities / n;
  out["mean_triples"] = triples / n;
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict pca_dict(const Rows& rows, std::size_t k) {
  if (rows.empty()) throw PreconditionError("pca: no rows");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) throw DimensionError("pca: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  const PcaResult p = pca(flat, rows.size(), rows[0].size(), k);
  py::dict out;
  out["mean"] = p.mean;
  out["eigenvalues"] = p.eigenvalues;
  Rows comps(k), proj(p.rows);
  for (std::size_t i = 0; i < k; ++i) {
    comps[i].assign(p.components.begin() + i * p.dims,
                    p.components.begin() + (i + 1) * p.dims);
  }
  for (std::size_t i = 0; i < p.rows; ++i) {
    proj[i].assign(p.projection.begin() + i * k,
                   p.projection.begin() + (i + 1) * k);
  }
  out["components"] = comps;
  out["projection"] = proj;
  return out;
}

}  // namespace
}  // namespace memre

PYBIND11_MODULE(_memre, m) {
  using namespace memre;
  m.doc() = "memre core bindings";
  m.attr("__build__") = build_describe();

  auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_OSError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidPriorError>(m, "InvalidPriorError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  (void)base;

  m.def("run_cli", &cli, py::arg("args"),
        "Runs the memre command line in-process; returns (code, stdout, stderr).");
  m.def("prior_shift", &prior_shift, py::arg("pi"), py::arg("pi_labeled"));
  m.def(
      "shift_coefficients",
      [](double pi, double pi_labeled) {
        const auto c = shift_coefficients(make_prior_table({pi}, {pi_labeled}).classes[0]);
        return py::make_tuple(c.unlabeled, c.subtraction);
      },
      py::arg("pi"), py::arg("pi_labeled"));
  m.def("risk", &risk_value, py::arg("kind"), py::arg("scores"),
        py::arg("positive"), py::arg("pi") = std::vector<double>{},
        py::arg("pi_labeled") = std::vector<double>{}, py::arg("gamma") = false,
        py::arg("clamp") = true,
        "Risk of a [pairs x classes] score matrix; kind is pn, pu or ssr-pu.");
  m.def(
      "micro_prf",
      [](const std::vector<FactTuple>& preds, const std::vector<FactTuple>& gold) {
        return prf_dict(micro_prf(to_facts(preds), to_facts(gold)));
      },
      py::arg("preds"), py::arg("gold"),
      "Facts are (doc, head, tail, relation) tuples.");
  m.def("corpus_stats", &corpus_stats, py::arg("path"));
  m.def(
      "normalize_config",
      [](const std::string& text) { return format_run_config(parse_run_config(text)); },
      py::arg("text"));
  m.def("pca", &pca_dict, py::arg("rows"), py::arg("k") = 2);
}
