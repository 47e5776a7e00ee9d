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

#ifndef PEEPVEC_OPCODES_HPP
#define PEEPVEC_OPCODES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "peepvec/ir.hpp"

namespace peepvec {

// Name of the canonical opcode that marks width/sign casts. Casts never
// survive canonicalization.
inline constexpr std::string_view kCastOpcode = "cast";
// Fallback opcode for table gaps.
inline constexpr std::string_view kUnknownOpcode = "unk";

struct OpcodeEntry {
  std::string raw;
  std::string canonical;
  IrType type_class = IrType::Int;
  bool commutative = false;
  bool foldable = false;
};

// Raw opcode -> canonical opcode mapping, loaded from the text table format
//
//   RAW_NAME canonical_name type_class commutative?(0|1) foldable?(0|1)
//
// Every canonical name is also registered as an identity entry so that
// canonical IR can be looked up (and re-canonicalized) with the same table.
class OpcodeTable {
 public:
  // Throws std::runtime_error with the offending line number on malformed
  // input, duplicate raw names or canonical names without known semantics.
  static OpcodeTable parse(std::string_view text);
  static OpcodeTable load(const std::string& path);

  // The table compiled into the library (core/data/opcodes.tbl).
  static const OpcodeTable& builtin();

  // Looks up a raw or canonical name; nullptr if unknown.
  const OpcodeEntry* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  // Raw entries in file order.
  const std::vector<OpcodeEntry>& raw_entries() const { return raw_; }
  // Sorted canonical opcode names, excluding the cast marker.
  std::vector<std::string> canonical_opcodes() const;

 private:
  std::vector<OpcodeEntry> raw_;
  std::unordered_map<std::string, std::size_t> index_;  // into all_
  std::vector<OpcodeEntry> all_;
};

// Semantics of canonical opcodes. Values are 64-bit patterns; float
// operations reinterpret them as IEEE doubles. Integer arithmetic wraps at 64
// bits regardless of the declared width (widths are masked by
// canonicalization).
struct OpInfo {
  std::string_view name;
  int arity = 0;
  bool is_vector = false;
};

const OpInfo* find_op(std::string_view canonical_name);
// Every canonical opcode with semantics, in a fixed order.
std::span<const OpInfo> all_ops();

struct OpValue {
  std::uint64_t bits = 0;
  bool opaque = false;
  friend bool operator==(const OpValue&, const OpValue&) = default;
};

// Evaluates a canonical opcode. Division by zero yields 0 (the folding pass
// never folds it). Unknown opcodes yield an opaque value.
OpValue eval_op(std::string_view canonical_name, std::span<const OpValue> args);

// True when folding this application at compile time is allowed: foldable
// per table, non-vector, and not a division by zero.
bool can_fold(const OpcodeEntry& entry, std::span<const OpValue> args);

}  // namespace peepvec

#endif  // PEEPVEC_OPCODES_HPP
