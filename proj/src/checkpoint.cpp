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

#include "memre/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "memre/errors.hpp"

namespace memre {

Tensor& ParameterStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) {
    throw ConfigError("parameter '" + name + "' registered twice");
  }
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

bool ParameterStore::contains(const std::string& name) const {
  return index_.count(name) > 0;
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

void ParameterStore::assign_values(const ParameterStore& other) {
  for (auto& [name, t] : entries_) {
    const auto& src = other.get(name);
    if (src.shape() != t.shape()) {
      throw DimensionError("parameter '" + name + "': shape " +
                           shape_string(src.shape()) + " vs " +
                           shape_string(t.shape()));
    }
    auto dst = t.mutable_values();
    std::copy(src.values().begin(), src.values().end(), dst.begin());
  }
}

ParameterStore ParameterStore::deep_copy() const {
  ParameterStore copy;
  for (const auto& [name, t] : entries_) {
    copy.add(name, t.clone(t.requires_grad()));
  }
  return copy;
}

std::string format_hex_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex_double(const std::string& text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  bool negative = false;
  if (first != last && *first == '-') {
    negative = true;
    ++first;
  }
  double value = 0.0;
  auto res = std::from_chars(first, last, value, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError("checkpoint: bad value '" + text + "'");
  }
  return negative ? -value : value;
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta,
                     const ParameterStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out << kCheckpointMagic << '\n';
  out << "meta " << meta.size() << '\n';
  for (const auto& [key, value] : meta) out << key << '\t' << value << '\n';
  out << "params " << params.size() << '\n';
  for (const auto& [name, t] : params.entries()) {
    out << name << ' ' << t.ndim();
    for (auto extent : t.shape()) out << ' ' << extent;
    out << '\n';
    bool first = true;
    for (double v : t.values()) {
      if (!first) out << ' ';
      out << format_hex_double(v);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kCheckpointMagic) {
    throw ParseError(path.string() + ": not a " + kCheckpointMagic + " file");
  }
  Checkpoint ckpt;
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "meta") {
    throw ParseError(path.string() + ": missing meta block");
  }
  std::getline(in, line);
  for (std::size_t i = 0; i < count; ++i) {
    std::getline(in, line);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("checkpoint: bad meta line");
    ckpt.meta[line.substr(0, tab)] = line.substr(tab + 1);
  }
  if (!(in >> tag >> count) || tag != "params") {
    throw ParseError(path.string() + ": missing params block");
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> name >> rank)) throw ParseError("checkpoint: truncated header");
    Shape shape(rank);
    for (auto& extent : shape) in >> extent;
    std::vector<double> values(shape_numel(shape));
    std::string token;
    for (auto& v : values) {
      if (!(in >> token)) throw ParseError("checkpoint: truncated '" + name + "'");
      v = parse_hex_double(token);
    }
    ckpt.params.add(name, Tensor::from(std::move(shape), std::move(values), true));
  }
  return ckpt;
}

}  // namespace memre
