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

#ifndef PEEPVEC_EMBEDDER_HPP
#define PEEPVEC_EMBEDDER_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/peephole.hpp"
#include "peepvec/vexine.hpp"
#include "peepvec/vocab.hpp"

// Function embeddings: entity vectors summed over normalized peepholes, with
// callee embeddings substituted at internal call sites, plus hashed
// character n-gram vectors for strings and library calls.
namespace peepvec {

inline constexpr std::size_t kTextDim = 100;
inline constexpr std::size_t kTextBuckets = std::size_t{1} << 16;

struct InstructionVectors {
  std::vector<double> o, t, a;
};

// o = V(opcode), t = V(type class) (zero for calls without a result),
// a = sum of V(argument token). Throws std::out_of_range for entities the
// vocabulary lacks.
InstructionVectors embed_instruction(const InstructionEntities& inst, const Vocabulary& v);
InstructionVectors embed_instruction(const Statement& s, const Vocabulary& v);

// Multiplicity of every entity in the O, T and A sums, indexed like the
// vocabulary. Accumulating counts makes the sums independent of the order in
// which instructions are visited.
struct EntityCounts {
  std::vector<std::uint64_t> o, t, a;

  explicit EntityCounts(std::size_t entities = 0) : o(entities), t(entities), a(entities) {}
  void add(const InstructionEntities& inst, const Vocabulary& v);
  void add(const EntityCounts& other, std::uint64_t times = 1);
  friend bool operator==(const EntityCounts&, const EntityCounts&) = default;
};

// Sum over entities in vocabulary order of count * vector.
std::vector<double> weighted_sum(std::span<const std::uint64_t> counts, const Vocabulary& v);

// Call graph over the internal calls of a program.
class CallGraph {
 public:
  // Throws std::invalid_argument for internal calls to unknown functions.
  explicit CallGraph(const Program& p);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t f) const { return names_[f]; }
  std::size_t index(std::string_view name) const;  // throws std::out_of_range
  const std::vector<std::size_t>& callees(std::size_t f) const { return edges_[f]; }
  std::size_t scc(std::size_t f) const { return scc_of_[f]; }
  // Strongly connected components, callees before callers.
  const std::vector<std::vector<std::size_t>>& sccs() const { return sccs_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::size_t>> edges_;
  std::vector<std::size_t> scc_of_;
  std::vector<std::vector<std::size_t>> sccs_;
};

// Hashed character n-gram stand-in for a subword text model: each string is
// lowercased and wrapped in '<' '>', its 3/4/5-grams select fixed
// pseudo-random unit vectors among 2^16 buckets, the string vector is the
// normalized sum, and the result is the sum over strings.
std::vector<double> embed_text(std::span<const std::string> items);
std::vector<double> text_bucket_vector(std::size_t bucket);

struct FunctionEmbedding {
  std::string name;
  std::string source;
  std::vector<double> O, T, A;  // vocabulary dim
  std::vector<double> S, L;     // kTextDim
  friend bool operator==(const FunctionEmbedding&, const FunctionEmbedding&) = default;
};

struct EmbedOptions {
  PeepholeConfig peepholes;
  NormLevel level = NormLevel::N3;
  std::size_t workers = 1;  // 0 = hardware concurrency
};

// Entity counts of a set of (already normalized) peepholes. Internal call
// statements whose callee has an entry in callee_counts contribute that entry
// instead of their own entities. externals, when given, receives the names
// of external callees not already listed, in first-occurrence order.
EntityCounts count_peepholes(std::span<const Peephole> peepholes, const Vocabulary& v,
                             const std::map<std::string, EntityCounts, std::less<>>* callee_counts = nullptr,
                             std::vector<std::string>* externals = nullptr);

FunctionEmbedding embedding_from_counts(const EntityCounts& c, const Vocabulary& v);

// Embeds every function of a canonical program. Peepholes are generated and
// normalized per function; callees are resolved bottom-up over the SCCs of
// the call graph, and calls inside one SCC embed as plain call
// instructions. Results follow the program's function order.
std::vector<FunctionEmbedding> embed_program(const Program& canonical, const Vocabulary& v,
                                             const EmbedOptions& options, std::string_view source = {});

// "peepvec-femb v1", optional "M source <id>", then one line per function:
// "F <name> O <d> T <d> A <d> S <100> L <100>". Names containing spaces or
// quotes are written quoted.
std::string format_embeddings(std::span<const FunctionEmbedding> fs);
std::vector<FunctionEmbedding> parse_embeddings(std::string_view text);
void save_embeddings(std::span<const FunctionEmbedding> fs, const std::string& path);
std::vector<FunctionEmbedding> load_embeddings(const std::string& path);

}  // namespace peepvec

#endif  // PEEPVEC_EMBEDDER_HPP
