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

#ifndef PEEPVEC_PIPELINE_HPP
#define PEEPVEC_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "peepvec/embedder.hpp"
#include "peepvec/ir.hpp"
#include "peepvec/simtasks.hpp"
#include "peepvec/vexnet.hpp"
#include "peepvec/vocab.hpp"

// Glue between stages shared by the command-line tool, the acceptance
// suite and the benchmarks.
namespace peepvec {

// Distinct triplets (sorted) of every normalized peephole of every function
// of a canonical program.
std::vector<Triplet> program_triplets(const Program& canonical, const PeepholeConfig& peepholes, NormLevel level,
                                      std::size_t workers = 1);

// Ground-truth key of a function: its group when known, else its name.
std::string function_key(const std::string& name, const std::map<std::string, std::string>& groups);

// Dense group ids in first-occurrence order.
std::vector<std::uint32_t> group_labels(std::span<const FunctionEmbedding> fs,
                                        const std::map<std::string, std::string>& groups);

std::vector<NetInput> network_inputs(std::span<const FunctionEmbedding> fs);

// Final embeddings of fs under m, keyed by function_key.
EmbeddingSet embedding_set(const VexNetModel& m, std::span<const FunctionEmbedding> fs,
                           const std::map<std::string, std::string>& groups, std::size_t workers = 1);

}  // namespace peepvec

#endif  // PEEPVEC_PIPELINE_HPP
