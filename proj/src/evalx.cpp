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

#include "memre/evalx.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "memre/errors.hpp"

namespace memre {

const char* axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kMemorySize:
      return "memory-size";
    case AblationAxis::kReadLayers:
      return "read-layers";
    case AblationAxis::kLabelFraction:
      return "label-fraction";
  }
  return "memory-size";
}

AblationAxis parse_axis(const std::string& name) {
  if (name == "memory-size") return AblationAxis::kMemorySize;
  if (name == "read-layers") return AblationAxis::kReadLayers;
  if (name == "label-fraction") return AblationAxis::kLabelFraction;
  throw ConfigError("unknown axis '" + name +
                    "' (expected memory-size|read-layers|label-fraction)");
}

RunConfig apply_axis(const RunConfig& base, AblationAxis axis,
                     const std::string& value) {
  RunConfig cfg = base;
  const std::string field = axis_name(axis);
  try {
    std::size_t used = 0;
    switch (axis) {
      case AblationAxis::kMemorySize:
        cfg.model.memory_size = std::stoul(value, &used);
        break;
      case AblationAxis::kReadLayers:
        cfg.model.read_layers = std::stoul(value, &used);
        validate_read_config(cfg.model.read());
        break;
      case AblationAxis::kLabelFraction:
        cfg.label_fraction = std::stod(value, &used);
        if (!(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0)) {
          throw ConfigError("label fraction must be in (0, 1]");
        }
        break;
    }
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::logic_error&) {
    throw ConfigError("bad " + field + " value '" + value + "'");
  }
  return cfg;
}

std::vector<AblationRow> run_ablation(AblationAxis axis,
                                      const std::vector<std::string>& values,
                                      const RunConfig& base,
                                      const DataDir& data,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t jobs) {
  struct Task {
    RunConfig cfg;
    std::string value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& v : values) {
    const RunConfig cfg = apply_axis(base, axis, v);
    for (auto seed : seeds) {
      Task t{cfg, v, seed};
      t.cfg.seed = seed;
      tasks.push_back(std::move(t));
    }
  }
  std::vector<AblationRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Task& t = tasks[i];
        const Experiment ex = run_experiment(t.cfg, data);
        if (!ex.eval) {
          throw InputError("ablation: no '" + t.cfg.eval_split + "' split");
        }
        rows[i] = {axis_name(axis), t.value, ex.eval->overall.precision,
                   ex.eval->overall.recall, ex.eval->overall.f1,
                   ex.eval->ign.f1, t.seed};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "axis,value,precision,recall,f1,ign_f1,seed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f,%.6f,%llu\n",
                  r.axis.c_str(), r.value.c_str(), r.precision, r.recall, r.f1,
                  r.ign_f1, static_cast<unsigned long long>(r.seed));
    out += buf;
  }
  return out;
}

void symmetric_eigen(std::vector<double> a, std::size_t n,
                     std::vector<double>& values, std::vector<double>& vectors) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i * n + j] * a[i * n + j];
        if (i != j) off += a[i * n + j] * a[i * n + j];
      }
    if (off <= 1e-30 * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * n + x] > a[y * n + y];
  });
  values.assign(n, 0.0);
  vectors.assign(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    values[r] = a[order[r] * n + order[r]];
    for (std::size_t k = 0; k < n; ++k) vectors[r * n + k] = v[k * n + order[r]];
  }
}

PcaResult pca(const std::vector<double>& values, std::size_t rows,
              std::size_t dims, std::size_t k) {
  if (rows < 3) {
    throw PreconditionError("pca: need at least 3 rows, got " +
                            std::to_string(rows));
  }
  if (k > dims || values.size() != rows * dims) {
    throw PreconditionError("pca: bad dimensions");
  }
  PcaResult out;
  out.rows = rows;
  out.dims = dims;
  out.k = k;
  out.mean.assign(dims, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dims; ++j) out.mean[j] += values[i * dims + j];
  for (auto& m : out.mean) m /= static_cast<double>(rows);
  std::vector<double> centered(values.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dims; ++j)
      centered[i * dims + j] = values[i * dims + j] - out.mean[j];
  std::vector<double> cov(dims * dims, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* x = centered.data() + i * dims;
    for (std::size_t a = 0; a < dims; ++a)
      for (std::size_t b = a; b < dims; ++b) cov[a * dims + b] += x[a] * x[b];
  }
  const double denom = static_cast<double>(rows - 1);
  for (std::size_t a = 0; a < dims; ++a)
    for (std::size_t b = a; b < dims; ++b) {
      cov[a * dims + b] /= denom;
      cov[b * dims + a] = cov[a * dims + b];
    }
  std::vector<double> vectors;
  symmetric_eigen(cov, dims, out.eigenvalues, vectors);
  out.components.assign(vectors.begin(),
                        vectors.begin() + static_cast<std::ptrdiff_t>(k * dims));
  for (std::size_t c = 0; c < k; ++c) {
    double* u = out.components.data() + c * dims;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < dims; ++j)
      if (std::fabs(u[j]) > std::fabs(u[arg])) arg = j;
    if (u[arg] < 0)
      for (std::size_t j = 0; j < dims; ++j) u[j] = -u[j];
  }
  out.projection.assign(rows * k, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dims; ++j)
        acc += centered[i * dims + j] * out.components[c * dims + j];
      out.projection[i * k + c] = acc;
    }
  return out;
}

std::vector<PcaPoint> export_memory_pca(const Model& model,
                                        const Vocabulary& vocab,
                                        const Corpus& corpus) {
  NoGradGuard no_grad;
  const std::size_t d = model.config.dim;
  std::vector<double> values;
  std::vector<PcaPoint> points;
  for (const auto& doc : corpus.docs) {
    const PreparedDocument prepared = prepare_document(doc, vocab);
    const Tensor e = entity_embeddings(model, prepared);
    values.insert(values.end(), e.values().begin(), e.values().end());
    for (std::size_t i = 0; i < e.rows(); ++i) {
      points.push_back({"head-entity", doc.id + ":" + std::to_string(i), 0, 0});
    }
  }
  if (!model.config.bypass()) {
    const Tensor m = model.params.get("memory.M");
    values.insert(values.end(), m.values().begin(), m.values().end());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      points.push_back({"memory-token", "M" + std::to_string(i), 0, 0});
    }
  }
  const PcaResult result = pca(values, points.size(), d, 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].x = result.projection[i * 2];
    points[i].y = result.projection[i * 2 + 1];
  }
  return points;
}

std::string pca_csv(const std::vector<PcaPoint>& points) {
  std::string out = "kind,label,pc1,pc2\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", p.x, p.y);
    out += p.kind + "," + p.label + buf;
  }
  return out;
}

}  // namespace memre
