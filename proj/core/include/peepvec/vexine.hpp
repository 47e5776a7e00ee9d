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

#ifndef PEEPVEC_VEXINE_HPP
#define PEEPVEC_VEXINE_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/opcodes.hpp"
#include "peepvec/peephole.hpp"

// Straight-line normalization of canonical peepholes and the reference
// interpreter used to check it.
//
// Peepholes may revisit a block, so a tmp can be assigned more than once.
// Every analysis tracks a version per tmp (bumped at each definition) instead
// of relying on SSA.
namespace peepvec {

enum class NormLevel : std::uint8_t { N0, N1, N2, N3 };

std::optional<NormLevel> parse_norm_level(std::string_view s);
std::string_view norm_level_name(NormLevel level);

// ---- Analyses ---------------------------------------------------------------

inline constexpr std::size_t kParam = std::numeric_limits<std::size_t>::max();

enum class UseKind : std::uint8_t { kTmp, kReg, kRegI };

// One read of a tmp or register and the statement whose definition reaches
// it (kParam when the value flows in from outside the peephole).
struct UseSite {
  std::size_t stmt = 0;
  UseKind kind = UseKind::kTmp;
  std::uint32_t id = 0;
  std::size_t def = kParam;
  friend bool operator==(const UseSite&, const UseSite&) = default;
};

// Uses in statement order, and in operand order within a statement.
// put / puti define registers; get, geti and register operands read them.
std::vector<UseSite> reaching_defs(std::span<const Statement> stmts);

struct AvailableExpr {
  std::string shape;  // e.g. "INT add(t0, 0x5:INT)"
  std::uint32_t tmp = 0;
  friend bool operator==(const AvailableExpr&, const AvailableExpr&) = default;
};

// Textual key of a tmp-defining expression; nullopt for copies, unk and
// expressions with register operands, which are never treated as available.
std::optional<std::string> expression_shape(const TmpAssign& a);

// For each statement, the expressions available on entry (sorted by shape):
// computed earlier into a tmp that still holds the value, with no operand
// redefined since. Loads are killed by any store or call; get(rK) by a put
// to rK or a call.
std::vector<std::vector<AvailableExpr>> available_exprs(std::span<const Statement> stmts);

// ---- Passes -----------------------------------------------------------------

enum class Pass : std::uint8_t {
  kRegisterPromotion,
  kRedundantWrite,
  kCopyPropagation,
  kConstantFolding,
  kCse,
  kLoadStore,
  kStoreStore,
  kDeadTemp,
};

std::string_view pass_name(Pass p);

// Passes making up a level, in pipeline order.
std::span<const Pass> passes_for(NormLevel level);

// Runs one pass in place; returns whether anything changed. Each pass is a
// single linear scan (plus compaction).
bool run_pass(Pass p, std::vector<Statement>& stmts,
              const OpcodeTable& table = OpcodeTable::builtin());

inline constexpr int kMaxNormRounds = 10;

// Repeats the level's pipeline until a round changes nothing, at most
// kMaxNormRounds times. Optionally reports the rounds executed.
std::vector<Statement> normalize_statements(std::vector<Statement> stmts, NormLevel level,
                                            const OpcodeTable& table = OpcodeTable::builtin(),
                                            int* rounds = nullptr);

Peephole normalize_peephole(const Peephole& p, NormLevel level,
                            const OpcodeTable& table = OpcodeTable::builtin());

// ---- Interpreter ------------------------------------------------------------

enum class LocKind : std::uint8_t { kTmp, kReg, kRegI, kMem, kAddr };

// Memory cell: a symbolic address M<n> or a concrete 64-bit address. The two
// spaces never overlap.
struct MemKey {
  bool symbolic = true;
  std::uint64_t addr = 0;
  friend auto operator<=>(const MemKey&, const MemKey&) = default;
};

// Initial value of a location never written inside the peephole.
using Environment = std::function<std::uint64_t(LocKind, std::uint64_t)>;

Environment seeded_environment(std::uint64_t seed);

struct MachineState {
  std::map<std::uint32_t, OpValue> registers;
  std::map<std::uint32_t, OpValue> indexed;  // puti / geti file
  std::map<MemKey, OpValue> memory;
  std::map<std::uint32_t, OpValue> tmps;  // final tmp values; not observable
};

// Executes the statements in order. Integer ops wrap at 64 bits, float ops
// use IEEE doubles on the same bit patterns. Calls yield a hash of callee and
// arguments and touch no state. "unk" yields an opaque value. Throws
// std::invalid_argument on abstract operands.
MachineState evaluate_peephole(std::span<const Statement> stmts, const Environment& env,
                               const OpcodeTable& table = OpcodeTable::builtin());
MachineState evaluate_peephole(const Peephole& p, std::uint64_t env_seed,
                               const OpcodeTable& table = OpcodeTable::builtin());

// Compares the observables (registers and memory). A location missing from
// one state holds its environment value there. Opaque observables never
// compare equal.
bool observables_equal(const MachineState& a, const MachineState& b, const Environment& env);

}  // namespace peepvec

#endif  // PEEPVEC_VEXINE_HPP
