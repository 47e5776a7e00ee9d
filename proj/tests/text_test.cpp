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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "peepvec/cfg.hpp"
#include "peepvec/synthgen.hpp"
#include "peepvec/text.hpp"
#include "test_util.hpp"

namespace peepvec {
namespace {

ParseErrorKind error_kind(std::string_view text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ParseErrorKind::kSemantic;
}

TEST(Parse, MinimalFunction) {
  const Program p = parse_program("fn \"f\" addr=0x0\nbb 0\n  t0:I32 = Add32(0x1, 0x2)\nsucc\n");
  ASSERT_EQ(p.functions.size(), 1u);
  ASSERT_EQ(p.functions[0].blocks.size(), 1u);
  EXPECT_EQ(p.functions[0].blocks[0].statements.size(), 1u);
  const auto& a = std::get<TmpAssign>(p.functions[0].blocks[0].statements[0]);
  const auto& op = std::get<OpExpr>(a.expr);
  EXPECT_EQ(op.opcode, "Add32");
  // Untyped hex constants take the statement type.
  EXPECT_EQ(op.args[0], Operand(IntConst{1, IrType::I32}));
}

TEST(Parse, DanglingSuccessor) {
  EXPECT_EQ(error_kind("fn \"f\" addr=0x0\nbb 0\nsucc 7\n"), ParseErrorKind::kDanglingSuccessor);
}

TEST(Parse, DuplicateBlock) {
  EXPECT_EQ(error_kind("fn \"f\" addr=0x0\nbb 0\nsucc\nbb 0\nsucc\n"),
            ParseErrorKind::kDuplicateBlock);
}

TEST(Parse, DuplicateTmp) {
  EXPECT_EQ(error_kind("fn \"f\" addr=0x0\nbb 0\n  t0:I64 = get(r16):I64\n"
                       "  t0:I64 = get(r24):I64\nsucc\n"),
            ParseErrorKind::kDuplicateTmp);
}

TEST(Parse, UnknownOpcode) {
  EXPECT_EQ(error_kind("fn \"f\" addr=0x0\nbb 0\n  t0:I64 = Frobnicate64(0x1)\nsucc\n"),
            ParseErrorKind::kUnknownOpcode);
}

TEST(Parse, SyntaxErrorCarriesPosition) {
  try {
    parse_program("fn \"f\" addr=0x0\nbb 0\n  t0:I64 = get(r16\nsucc\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::kSyntax);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 0u);
    EXPECT_NE(std::string(e.what()).find("line 3:"), std::string::npos);
  }
}

TEST(Parse, FibonacciBlock) {
  const Program p = load_program(testing::fixture("fib.vexir"));
  ASSERT_EQ(p.functions.size(), 1u);
  EXPECT_EQ(p.functions[0].blocks.size(), 1u);
  EXPECT_EQ(p.functions[0].statement_count(), 12u);
}

TEST(Parse, FixtureProgram) {
  const Program p = load_program(testing::fixture("a.vexir"));
  ASSERT_EQ(p.functions.size(), 3u);
  const IrFunction* main = p.find_function("main");
  ASSERT_NE(main, nullptr);
  EXPECT_EQ(main->strings.size(), 2u);
  EXPECT_EQ(main->extern_calls, std::vector<std::string>{"printf"});
  for (const auto& f : p.functions) EXPECT_TRUE(validate_cfg(f).empty()) << f.name;
}

TEST(Parse, UnresolvedInternalCall) {
  EXPECT_EQ(error_kind("fn \"f\" addr=0x0\nbb 0\n  call int \"g\"()\nsucc\n"),
            ParseErrorKind::kSemantic);
}

TEST(Serialize, EmptyProgramIsHeaderOnly) {
  Program p;
  p.name = "empty";
  EXPECT_EQ(serialize_program(p), "program \"empty\"\n");
  EXPECT_EQ(parse_program(serialize_program(p)), p);
}

TEST(Serialize, FixturesAreByteStable) {
  for (const char* name : {"a.vexir", "fib.vexir", "loop4.vexir"}) {
    const std::string once = serialize_program(load_program(testing::fixture(name)));
    const std::string twice = serialize_program(parse_program(once));
    EXPECT_EQ(once, twice) << name;
  }
}

TEST(Serialize, GeneratedProgramsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Program p;
    p.name = "gen";
    p.functions.push_back(gen_function(seed, 1 + seed % 120, "f" + std::to_string(seed)));
    p.functions.push_back(gen_function(seed + 1000, 30, "g"));
    const Program q = parse_program(serialize_program(p));
    ASSERT_EQ(q, p) << "seed " << seed;
  }
}

TEST(Serialize, ConstantEdgeCases) {
  const int128 big = std::numeric_limits<std::int64_t>::max();
  const int128 min128 = static_cast<int128>(static_cast<unsigned __int128>(1) << 127);
  IrFunction f;
  f.name = "consts";
  BasicBlock b;
  b.statements = {
      TmpAssign{0, IrType::I64, ConstExpr{IntConst{-big - 1, IrType::I64}}},
      TmpAssign{1, IrType::I64, ConstExpr{IntConst{min128, IrType::I64}}},
      TmpAssign{2, IrType::F64, ConstExpr{FloatConst{std::bit_cast<double>(0x7FF8000000000123ull)}}},
      TmpAssign{3, IrType::F64, ConstExpr{FloatConst{-0.0}}},
      TmpAssign{4, IrType::F64, ConstExpr{FloatConst{0.1}}},
      TmpAssign{5, IrType::F64, ConstExpr{FloatConst{-std::numeric_limits<double>::infinity()}}},
  };
  f.blocks.push_back(b);
  Program p;
  p.functions.push_back(f);
  EXPECT_EQ(parse_program(serialize_program(p)), p);
}

TEST(Serialize, StringEscapes) {
  IrFunction f;
  f.name = "q\"uote\\d\n";
  f.strings = {std::string("tab\there\x01\x7f", 11), "plain"};
  f.blocks.push_back(BasicBlock{});
  Program p;
  p.name = "escapes";
  p.functions.push_back(f);
  const std::string text = serialize_program(p);
  EXPECT_NE(text.find("\\x01"), std::string::npos);
  EXPECT_EQ(parse_program(text), p);
}

TEST(Serialize, AbstractPeepholeStatements) {
  ParseOptions opts;
  opts.check_invariants = false;
  const Statement s = parse_statement("VAR:INT = add(VAR, CONST)", opts);
  const auto& a = std::get<TmpAssign>(s);
  EXPECT_EQ(a.tmp, kAbstractId);
  EXPECT_EQ(format_statement(s), "VAR:INT = add(VAR, CONST)");
}

TEST(Serialize, StatementFormats) {
  EXPECT_EQ(format_statement(PutReg{16, TmpRef{3}}), "put(r16) = t3");
  EXPECT_EQ(format_statement(Store{MemRef{1}, IntConst{-5, IrType::Int}}), "store(M1) = -5:INT");
  EXPECT_EQ(format_statement(TmpAssign{2, IrType::I32, Load{TmpRef{1}, IrType::I32}}),
            "t2:I32 = load(t1):I32");
}

}  // namespace
}  // namespace peepvec
