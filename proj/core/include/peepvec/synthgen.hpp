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

#ifndef PEEPVEC_SYNTHGEN_HPP
#define PEEPVEC_SYNTHGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peepvec/ir.hpp"

// Deterministic synthetic IR: random CFGs, raw functions, canonical
// straight-line peepholes, observation-preserving variants and labeled
// corpora of variant groups.
namespace peepvec {

// A function whose blocks each hold one register write. Successors form a
// spanning tree rooted at block 0 plus extra edges (mostly forward, one in ten
// backward) until the edge count reaches round(edge_ratio * blocks). Blocks
// never get more than two successors.
IrFunction random_cfg(std::uint64_t seed, std::size_t blocks, double edge_ratio = 1.35);

// A raw (width-typed, SSA) function with exactly size statements.
IrFunction gen_function(std::uint64_t seed, std::size_t size, std::string name = "f");

struct PeepholeGenOptions {
  std::size_t tmp_pool = 0;  // distinct tmp ids; 0 means size / 2 + 4
  bool allow_unknown = false;
  bool allow_reg_operands = true;
};

// A canonical straight-line statement list that reuses tmp ids, as a
// peephole covering a loop does.
std::vector<Statement> gen_peephole(std::uint64_t seed, std::size_t size,
                                    const PeepholeGenOptions& options = {});

struct VariationProfile {
  bool rename_tmps = false;
  bool rename_regs = false;
  double reorder = 0;      // probability of picking a random ready statement
  double junk = 0;         // per-statement rate of inserted copies, writes, dead ops
  double reexpress = 0;    // per-operation rate of mul/shl and add/sub rewrites
  double split_blocks = 0; // per-block rate of splitting into two chained blocks

  static VariationProfile none() { return {}; }
  static VariationProfile full();
};

// How a variant relates to its base function.
struct VariantInfo {
  // Base block id -> variant blocks whose concatenation it became.
  std::vector<std::vector<std::uint32_t>> block_map;
  // Base register id -> variant register id (registers and indexed file).
  std::map<std::uint32_t, std::uint32_t> reg_map;
};

// Throws std::invalid_argument for rates outside [0, 1].
IrFunction make_variant(const IrFunction& f, const VariationProfile& profile, std::uint64_t seed,
                        VariantInfo* info = nullptr);

struct CorpusConfig {
  std::size_t groups = 200;
  std::size_t variants = 4;
  std::size_t min_size = 20;
  std::size_t max_size = 200;
  double internal_call_rate = 0.3;
  std::uint64_t seed = 0xC0FFEE;
  VariationProfile profile = VariationProfile::full();
};

// key=value lines; '#' comments. Unknown keys throw std::runtime_error.
CorpusConfig parse_corpus_config(std::string_view text);

struct Corpus {
  // One program per variant index; function i of every program belongs to
  // group i.
  std::vector<Program> programs;
  // Function name -> group id, in program then function order.
  std::vector<std::pair<std::string, std::string>> groups;
};

Corpus make_corpus(const CorpusConfig& cfg);

std::string group_name(std::size_t group);
std::string variant_function_name(std::size_t group, std::size_t variant);

// groups.tsv: "function-name<TAB>group-id" lines.
std::string format_groups(const std::vector<std::pair<std::string, std::string>>& groups);
std::map<std::string, std::string> parse_groups(std::string_view text);

// Writes variant_<v>.vexir files and groups.tsv into dir (created if needed).
void write_corpus(const Corpus& corpus, const std::string& dir);

}  // namespace peepvec

#endif  // PEEPVEC_SYNTHGEN_HPP
