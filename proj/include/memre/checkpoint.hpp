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

#ifndef MEMRE_CHECKPOINT_HPP_
#define MEMRE_CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "memre/tensor.hpp"

namespace memre {

inline constexpr const char* kCheckpointMagic = "memre-ckpt-v1";

// Named learnable tensors in insertion order. Handles alias the stored
// tensors, so modules may keep copies of the Tensor objects they own.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;

  void zero_grad();
  // Copies values (not handles) from `other`, which must have the same names
  // and shapes.
  void assign_values(const ParameterStore& other);
  ParameterStore deep_copy() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParameterStore params;
};

// Text container: magic line, `meta` key/value block, then one header line per
// parameter (name, rank, extents) followed by its values as hex floats, which
// round-trip bit-exactly.
void save_checkpoint(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta,
                     const ParameterStore& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string format_hex_double(double value);
double parse_hex_double(const std::string& text);

}  // namespace memre

#endif  // MEMRE_CHECKPOINT_HPP_
