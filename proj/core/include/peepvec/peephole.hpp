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

#ifndef PEEPVEC_PEEPHOLE_HPP
#define PEEPVEC_PEEPHOLE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/rng.hpp"

namespace peepvec {

struct PeepholeConfig {
  std::uint32_t k = 72;  // maximum blocks per peephole
  std::uint32_t c = 2;   // minimum visits per block
  std::uint64_t seed = kDefaultSeed;
};

// A walk of at most k blocks flattened into one statement sequence.
struct Peephole {
  std::vector<std::uint32_t> block_ids;
  std::vector<Statement> statements;
  friend bool operator==(const Peephole&, const Peephole&) = default;
};

struct PeepholeSet {
  std::vector<Peephole> peepholes;
  std::vector<std::uint32_t> visit_counts;  // indexed by block id
  std::size_t iterations = 0;
  friend bool operator==(const PeepholeSet&, const PeepholeSet&) = default;
};

// Per-iteration worklist bookkeeping, recorded when requested.
struct WalkTrace {
  std::vector<std::size_t> worklist_sizes;  // |U| before each walk
  std::vector<std::uint64_t> deficits;      // sum of max(0, c - count) before each walk
};

// Random-walk decomposition of f's CFG. The generator is seeded with
// hash(seed, function name), so results do not depend on which worker
// processes the function. Throws std::invalid_argument for k == 0 or c == 0.
PeepholeSet generate_peepholes(const IrFunction& f, const PeepholeConfig& cfg,
                               WalkTrace* trace = nullptr);

// Builds a peephole from an explicit block path.
Peephole make_peephole(const IrFunction& f, std::vector<std::uint32_t> block_ids);

struct PeepholeStats {
  double mean_peepholes = 0;
  double mean_visits = 0;        // mean total block visits per run
  double reference = 0;          // c|V|/2
  double bound = 0;              // c|V|
  std::size_t max_peepholes = 0;
};

// Monte-Carlo summary over seeds cfg.seed, cfg.seed + 1, ...
PeepholeStats expected_peephole_stats(const IrFunction& f, const PeepholeConfig& cfg,
                                      std::size_t trials);

// ".peep" dump: one line per peephole, peep "<fn>" <block ids...>
std::string format_peep_dump(std::string_view fn_name, const PeepholeSet& set);

struct PeepLine {
  std::string function;
  std::vector<std::uint32_t> block_ids;
};
// Inverse of format_peep_dump; throws std::runtime_error with a line number.
std::vector<PeepLine> parse_peep_dump(std::string_view text);

}  // namespace peepvec

#endif  // PEEPVEC_PEEPHOLE_HPP
