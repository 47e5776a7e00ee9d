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

#ifndef PEEPVEC_TEXT_HPP
#define PEEPVEC_TEXT_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/opcodes.hpp"

// The line-oriented .vexir format.
//
//   program "name"
//   fn "f" addr=0x401000
//   str "hello"
//   call "puts"
//   bb 0
//     t0:I32 = get(r16):I32
//     t1:I32 = Add32(t0, 0x8:I32)
//     put(r16) = t1
//     store(M1) = t1
//     call ext "puts"(t1)
//   succ 1
//   bb 1
//   succ
//
// Besides the core grammar the parser accepts: a bare operand as the right
// hand side of a tmp assignment (copies), an optional `entry=N` on the fn line
// (written only when the entry is not block 0), untyped hex constants (they
// take the statement type), and VAR / REG in destination position for
// abstracted peepholes.
namespace peepvec {

enum class ParseErrorKind {
  kSyntax,
  kDuplicateBlock,
  kDanglingSuccessor,
  kDuplicateTmp,
  kUnknownOpcode,
  kSemantic,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, std::size_t column, const std::string& msg);

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

struct ParseOptions {
  // Opcode inventory; nullptr means the built-in table.
  const OpcodeTable* opcodes = nullptr;
  // Reject programs violating Program/IrFunction invariants (SSA, dangling
  // successors, unresolved internal calls). Turned off to read peephole dumps.
  bool check_invariants = true;
};

Program parse_program(std::string_view text, const ParseOptions& options = {});
Program load_program(const std::string& path, const ParseOptions& options = {});

std::string serialize_program(const Program& p);
void save_program(const Program& p, const std::string& path);

std::string format_operand(const Operand& o);
std::string format_expression(const Expression& e);
std::string format_statement(const Statement& s);
std::string quote_string(std::string_view s);
// Decodes the quoted string at the start of s into out and returns the number
// of characters consumed. Throws ParseError.
std::size_t unquote_prefix(std::string_view s, std::string& out);

// Parses a single statement line (used by the peephole dumps and tests).
Statement parse_statement(std::string_view line, const ParseOptions& options = {});

}  // namespace peepvec

#endif  // PEEPVEC_TEXT_HPP
