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

#ifndef PEEPVEC_CANON_HPP
#define PEEPVEC_CANON_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/opcodes.hpp"
#include "peepvec/peephole.hpp"

namespace peepvec {

// A raw opcode missing from the table. The statement is kept with the
// synthetic opcode "unk".
struct CanonDiagnostic {
  std::string function;
  std::uint32_t block = 0;
  std::size_t statement = 0;
  std::string opcode;
};

// Rewrites a raw function into canonical form:
//  - opcodes collapse to their canonical names and types to the four classes;
//  - cast statements disappear and their uses read the cast operand;
//  - add/sub with one negative constant flip to sub/add with its magnitude;
//  - every load/store address becomes a direct symbolic address M<n>, numbered
//    by first occurrence. A load whose result only ever serves as an address
//    is dropped and the dependent access gets its own symbol.
// Operands stay concrete; abstraction happens at triplet extraction.
IrFunction canonicalize_function(const IrFunction& f,
                                 const OpcodeTable& table = OpcodeTable::builtin(),
                                 std::vector<CanonDiagnostic>* diagnostics = nullptr);

Program canonicalize_program(const Program& p, const OpcodeTable& table = OpcodeTable::builtin(),
                             std::vector<CanonDiagnostic>* diagnostics = nullptr);

// Replaces tmps by VAR, constants by CONST, registers by REG, memory symbols
// by MEM and internal/external callees by FUNC.
Statement abstract_statement(const Statement& s);
Peephole abstract_operands(const Peephole& p);

}  // namespace peepvec

#endif  // PEEPVEC_CANON_HPP
