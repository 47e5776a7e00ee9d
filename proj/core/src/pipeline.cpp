// Copyright 2026 The peepvec Authors. All Rights Reserved.
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

#include "peepvec/pipeline.hpp"

#include <algorithm>

#include "peepvec/parallel.hpp"
#include "peepvec/peephole.hpp"
#include "peepvec/vexine.hpp"

namespace peepvec {

std::vector<Triplet> program_triplets(const Program& canonical, const PeepholeConfig& peepholes, NormLevel level,
                                      std::size_t workers) {
  std::vector<std::vector<Triplet>> per_function(canonical.functions.size());
  parallel_for(canonical.functions.size(), workers, [&](std::size_t i) {
    const PeepholeSet set = generate_peepholes(canonical.functions[i], peepholes);
    auto& out = per_function[i];
    for (const Peephole& p : set.peepholes) {
      const auto ts = extract_triplets(normalize_peephole(p, level));
      out.insert(out.end(), ts.begin(), ts.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  });
  std::vector<Triplet> all;
  for (auto& ts : per_function) all.insert(all.end(), ts.begin(), ts.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

std::string function_key(const std::string& name, const std::map<std::string, std::string>& groups) {
  auto it = groups.find(name);
  return it == groups.end() ? name : it->second;
}

std::vector<std::uint32_t> group_labels(std::span<const FunctionEmbedding> fs,
                                        const std::map<std::string, std::string>& groups) {
  std::map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  for (const FunctionEmbedding& f : fs) {
    out.push_back(ids.emplace(function_key(f.name, groups), static_cast<std::uint32_t>(ids.size())).first->second);
  }
  return out;
}

std::vector<NetInput> network_inputs(std::span<const FunctionEmbedding> fs) {
  std::vector<NetInput> out;
  out.reserve(fs.size());
  for (const FunctionEmbedding& f : fs) out.push_back(network_input(f));
  return out;
}

EmbeddingSet embedding_set(const VexNetModel& m, std::span<const FunctionEmbedding> fs,
                           const std::map<std::string, std::string>& groups, std::size_t workers) {
  EmbeddingSet s;
  for (const FunctionEmbedding& f : fs) {
    s.ids.push_back(f.name);
    s.keys.push_back(function_key(f.name, groups));
  }
  s.points = fs.empty() ? Matrix(0, m.config.out_dim) : embed_all(m, network_inputs(fs), workers);
  return s;
}

}  // namespace peepvec
