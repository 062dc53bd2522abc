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

#include "memre/metrics.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "memre/errors.hpp"

namespace memre {
namespace {

PredictionSet without_distant(const PredictionSet& facts,
                              const DistantSet& distant) {
  PredictionSet out;
  for (const auto& f : facts) {
    if (!distant.count({f.head_name, f.tail_name, f.relation})) out.insert(f);
  }
  return out;
}

nlohmann::ordered_json prf_json(const PRF& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["correct"] = m.correct;
  j["predicted"] = m.predicted;
  j["gold"] = m.gold;
  return j;
}

nlohmann::ordered_json sub_json(const SubReport& s) {
  nlohmann::ordered_json j;
  j["relations"] = s.relations;
  j["metrics"] = s.metrics ? prf_json(*s.metrics) : nlohmann::ordered_json();
  return j;
}

}  // namespace

PRF micro_prf(const PredictionSet& preds, const PredictionSet& gold) {
  if (gold.empty()) throw PreconditionError("micro_prf: empty gold set");
  PRF m;
  m.predicted = preds.size();
  m.gold = gold.size();
  for (const auto& f : preds) m.correct += gold.count(f);
  m.precision = m.predicted ? static_cast<double>(m.correct) /
                                  static_cast<double>(m.predicted)
                            : 0.0;
  m.recall = static_cast<double>(m.correct) / static_cast<double>(m.gold);
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

PRF ign_f1(const PredictionSet& preds, const PredictionSet& gold,
           const DistantSet& distant) {
  return micro_prf(without_distant(preds, distant),
                   without_distant(gold, distant));
}

PredictionSet gold_facts(const Corpus& corpus) {
  PredictionSet out;
  for (const auto& doc : corpus.docs) {
    for (const auto& t : doc.labels) {
      out.insert({doc.id, t.head, t.tail, t.relation, doc.entity_name(t.head),
                  doc.entity_name(t.tail)});
    }
  }
  return out;
}

DistantSet distant_triples(const Corpus& corpus) {
  DistantSet out;
  for (const auto& doc : corpus.docs) {
    for (const auto& t : doc.labels) {
      out.insert({doc.entity_name(t.head), doc.entity_name(t.tail),
                  t.relation});
    }
  }
  return out;
}

TopKSplit topk_split(const PredictionSet& gold, std::size_t k,
                     std::size_t relations) {
  if (k > relations) {
    throw PreconditionError("topk_split: K = " + std::to_string(k) +
                            " exceeds R = " + std::to_string(relations));
  }
  std::vector<std::size_t> freq(relations + 1, 0);
  for (const auto& f : gold) {
    if (f.relation >= 1 && f.relation <= relations) ++freq[f.relation];
  }
  std::vector<std::size_t> ids(relations);
  for (std::size_t r = 0; r < relations; ++r) ids[r] = r + 1;
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return freq[a] > freq[b];
  });
  TopKSplit split;
  for (std::size_t i = 0; i < relations; ++i) {
    (i < k ? split.top : split.rest).insert(ids[i]);
  }
  return split;
}

PredictionSet restrict_relations(const PredictionSet& facts,
                                 const std::set<std::size_t>& relations) {
  PredictionSet out;
  for (const auto& f : facts) {
    if (relations.count(f.relation)) out.insert(f);
  }
  return out;
}

MetricReport make_report(const PredictionSet& preds, const PredictionSet& gold,
                         std::size_t relations, const DistantSet* distant,
                         std::optional<std::size_t> topk) {
  MetricReport report;
  report.overall = micro_prf(preds, gold);
  report.ign = distant ? ign_f1(preds, gold, *distant) : report.overall;
  report.per_class.assign(relations, {});
  auto slot = [&](std::size_t r) -> ClassCounts* {
    return r >= 1 && r <= relations ? &report.per_class[r - 1] : nullptr;
  };
  for (const auto& f : gold) {
    if (auto* c = slot(f.relation)) ++c->gold;
  }
  for (const auto& f : preds) {
    if (auto* c = slot(f.relation)) {
      ++c->predicted;
      c->correct += gold.count(f);
    }
  }
  if (topk) {
    report.topk = topk;
    const TopKSplit split = topk_split(gold, *topk, relations);
    auto side = [&](const std::set<std::size_t>& ids) {
      SubReport sub;
      sub.relations.assign(ids.begin(), ids.end());
      const PredictionSet g = restrict_relations(gold, ids);
      if (!g.empty()) sub.metrics = micro_prf(restrict_relations(preds, ids), g);
      return sub;
    };
    report.top = side(split.top);
    report.rest = side(split.rest);
  }
  return report;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["precision"] = report.overall.precision;
  j["recall"] = report.overall.recall;
  j["f1"] = report.overall.f1;
  j["ign_f1"] = report.ign.f1;
  j["overall"] = prf_json(report.overall);
  j["ign"] = prf_json(report.ign);
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < report.per_class.size(); ++r) {
    const auto& c = report.per_class[r];
    classes.push_back({{"relation", r + 1},
                       {"correct", c.correct},
                       {"predicted", c.predicted},
                       {"gold", c.gold}});
  }
  j["per_class"] = classes;
  if (report.topk) {
    j["topk"] = *report.topk;
    j["top"] = sub_json(*report.top);
    j["rest"] = sub_json(*report.rest);
  }
  return j.dump(2) + "\n";
}

}  // namespace memre
