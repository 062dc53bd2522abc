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

#ifndef MEMRE_EVALX_HPP_
#define MEMRE_EVALX_HPP_

// Ablation sweeps and the PCA export of memory tokens next to entity vectors.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "memre/config.hpp"
#include "memre/model.hpp"
#include "memre/pipeline.hpp"

namespace memre {

enum class AblationAxis { kMemorySize, kReadLayers, kLabelFraction };

const char* axis_name(AblationAxis axis);
AblationAxis parse_axis(const std::string& name);  // throws ConfigError

struct AblationRow {
  std::string axis;
  std::string value;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ign_f1 = 0.0;
  std::uint64_t seed = 0;
};

// Returns `base` with the axis set to `value`; throws ConfigError if the value
// does not parse for the axis.
RunConfig apply_axis(const RunConfig& base, AblationAxis axis,
                     const std::string& value);

// One train + evaluate per (value, seed), rows ordered by value then seed.
// Runs on up to `jobs` threads; rows do not depend on `jobs`.
std::vector<AblationRow> run_ablation(AblationAxis axis,
                                      const std::vector<std::string>& values,
                                      const RunConfig& base,
                                      const DataDir& data,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t jobs = 1);

// Header axis,value,precision,recall,f1,ign_f1,seed.
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct PcaResult {
  std::vector<double> mean;         // [d]
  std::vector<double> eigenvalues;  // all d, descending
  std::vector<double> components;   // [k x d], row-major unit vectors
  std::vector<double> projection;   // [n x k]
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::size_t k = 0;
};

// Covariance eigendecomposition of mean-centered rows. Each component's
// largest-magnitude entry is made positive. Throws PreconditionError for
// fewer than 3 rows or k > d.
PcaResult pca(const std::vector<double>& values, std::size_t rows,
              std::size_t dims, std::size_t k);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues
// descending; eigenvectors as rows of `vectors`.
void symmetric_eigen(std::vector<double> matrix, std::size_t n,
                     std::vector<double>& values, std::vector<double>& vectors);

struct PcaPoint {
  std::string kind;  // head-entity | memory-token
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

// Projects memory tokens together with the pre-read vectors of every entity
// in `corpus` onto their top two principal components.
std::vector<PcaPoint> export_memory_pca(const Model& model,
                                        const Vocabulary& vocab,
                                        const Corpus& corpus);

std::string pca_csv(const std::vector<PcaPoint>& points);

}  // namespace memre

#endif  // MEMRE_EVALX_HPP_
