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

#ifndef PEEPVEC_IR_HPP
#define PEEPVEC_IR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

// In-memory form of the VEX-like IR. Raw functions come from a lifter (or the
// synthetic generator) and are in SSA form; canonical functions use only the
// four type classes; abstracted peepholes replace operands with tokens.
namespace peepvec {

using int128 = __int128;

enum class IrType : std::uint8_t {
  I8, I16, I32, I64, F32, F64, V128, V256,
  Int, Float, Double, Vector,
};

std::string_view type_name(IrType t);
std::optional<IrType> parse_type(std::string_view s);
bool is_canonical(IrType t);
// Rule-4 mapping of raw widths to the four classes; identity on classes.
IrType type_class(IrType t);

enum class AbstractToken : std::uint8_t { Var, Const, Reg, Mem, Func };

std::string_view token_name(AbstractToken t);
std::optional<AbstractToken> parse_token(std::string_view s);

// Sentinel id used for destinations that were abstracted away (printed as
// VAR / REG).
inline constexpr std::uint32_t kAbstractId = 0xFFFFFFFFu;

struct TmpRef {
  std::uint32_t id = 0;
  friend bool operator==(const TmpRef&, const TmpRef&) = default;
};
struct IntConst {
  int128 value = 0;
  IrType type = IrType::I64;
  friend bool operator==(const IntConst&, const IntConst&) = default;
};
struct FloatConst {
  double value = 0.0;
  // Bitwise, so NaN payloads and -0.0 compare faithfully.
  friend bool operator==(const FloatConst& a, const FloatConst& b);
};
struct RegRef {
  std::uint32_t id = 0;
  friend bool operator==(const RegRef&, const RegRef&) = default;
};
struct MemRef {
  std::uint32_t id = 0;
  friend bool operator==(const MemRef&, const MemRef&) = default;
};
struct Abstract {
  AbstractToken token = AbstractToken::Var;
  friend bool operator==(const Abstract&, const Abstract&) = default;
};

using Operand = std::variant<TmpRef, IntConst, FloatConst, RegRef, MemRef, Abstract>;

struct GetReg {
  std::uint32_t reg = 0;
  IrType type = IrType::I64;
  friend bool operator==(const GetReg&, const GetReg&) = default;
};
struct GetRegI {
  std::uint32_t reg = 0;
  IrType type = IrType::I64;
  friend bool operator==(const GetRegI&, const GetRegI&) = default;
};
struct Load {
  Operand addr;
  IrType type = IrType::I64;
  friend bool operator==(const Load&, const Load&) = default;
};
// Unary, binary and ternary operations share one node; arity is args.size().
struct OpExpr {
  std::string opcode;
  std::vector<Operand> args;
  friend bool operator==(const OpExpr&, const OpExpr&) = default;
};
// A bare operand on the right-hand side: a copy or a constant definition.
struct ConstExpr {
  Operand value;
  friend bool operator==(const ConstExpr&, const ConstExpr&) = default;
};

using Expression = std::variant<GetReg, GetRegI, Load, OpExpr, ConstExpr>;

struct TmpAssign {
  std::uint32_t tmp = 0;
  IrType type = IrType::I64;
  Expression expr;
  friend bool operator==(const TmpAssign&, const TmpAssign&) = default;
};
struct PutReg {
  std::uint32_t reg = 0;
  Operand value;
  friend bool operator==(const PutReg&, const PutReg&) = default;
};
struct PutRegI {
  std::uint32_t reg = 0;
  Operand value;
  friend bool operator==(const PutRegI&, const PutRegI&) = default;
};
struct Store {
  Operand addr;
  Operand value;
  friend bool operator==(const Store&, const Store&) = default;
};
struct CallResult {
  std::uint32_t tmp = 0;
  IrType type = IrType::I64;
  friend bool operator==(const CallResult&, const CallResult&) = default;
};
struct Call {
  std::optional<CallResult> result;
  std::string callee;
  bool external = false;
  std::vector<Operand> args;
  friend bool operator==(const Call&, const Call&) = default;
};

using Statement = std::variant<TmpAssign, PutReg, PutRegI, Store, Call>;

struct BasicBlock {
  std::uint32_t id = 0;
  std::vector<Statement> statements;
  std::vector<std::uint32_t> successors;
  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

struct IrFunction {
  std::string name;
  std::uint64_t address = 0;
  std::vector<BasicBlock> blocks;
  std::vector<std::string> strings;
  std::vector<std::string> extern_calls;
  std::uint32_t entry = 0;

  const BasicBlock* find_block(std::uint32_t id) const;
  std::size_t statement_count() const;
  friend bool operator==(const IrFunction&, const IrFunction&) = default;
};

struct Program {
  std::string name;
  std::vector<IrFunction> functions;

  const IrFunction* find_function(std::string_view name) const;
  friend bool operator==(const Program&, const Program&) = default;
};

// Helpers shared by the analyses.

// Tmp defined by the statement, if any.
std::optional<std::uint32_t> defined_tmp(const Statement& s);

// Result type of the statement if it has one.
std::optional<IrType> statement_type(const Statement& s);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

namespace detail {
template <class S, class Fn>
void visit_operands(S& s, const Fn& fn) {
  std::visit(Overloaded{
                 [&](auto& a) {
                   using T = std::remove_cvref_t<decltype(a)>;
                   if constexpr (std::is_same_v<T, TmpAssign>) {
                     std::visit(Overloaded{
                                    [&](auto& e) {
                                      using E = std::remove_cvref_t<decltype(e)>;
                                      if constexpr (std::is_same_v<E, Load>) {
                                        fn(e.addr);
                                      } else if constexpr (std::is_same_v<E, OpExpr>) {
                                        for (auto& o : e.args) fn(o);
                                      } else if constexpr (std::is_same_v<E, ConstExpr>) {
                                        fn(e.value);
                                      }
                                    },
                                },
                                a.expr);
                   } else if constexpr (std::is_same_v<T, PutReg> ||
                                        std::is_same_v<T, PutRegI>) {
                     fn(a.value);
                   } else if constexpr (std::is_same_v<T, Store>) {
                     fn(a.addr);
                     fn(a.value);
                   } else if constexpr (std::is_same_v<T, Call>) {
                     for (auto& o : a.args) fn(o);
                   }
                 },
             },
             s);
}
}  // namespace detail

// Operands read by a statement, in textual order (address before value).
void for_each_operand(const Statement& s, const auto& fn) {
  detail::visit_operands(s, fn);
}
void for_each_operand(Statement& s, const auto& fn) {
  detail::visit_operands(s, fn);
}

}  // namespace peepvec

#endif  // PEEPVEC_IR_HPP
