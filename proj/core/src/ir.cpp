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

#include "peepvec/ir.hpp"

#include <array>
#include <bit>

namespace peepvec {

namespace {
constexpr std::array<std::string_view, 12> kTypeNames = {
    "I8", "I16", "I32", "I64", "F32", "F64", "V128", "V256",
    "INT", "FLOAT", "DOUBLE", "VECTOR",
};
constexpr std::array<std::string_view, 5> kTokenNames = {"VAR", "CONST", "REG", "MEM", "FUNC"};
}  // namespace

std::string_view type_name(IrType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<IrType> parse_type(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == s) return static_cast<IrType>(i);
  }
  return std::nullopt;
}

bool is_canonical(IrType t) { return t >= IrType::Int; }

IrType type_class(IrType t) {
  switch (t) {
    case IrType::I8:
    case IrType::I16:
    case IrType::I32:
    case IrType::I64:
      return IrType::Int;
    case IrType::F32:
      return IrType::Float;
    case IrType::F64:
      return IrType::Double;
    case IrType::V128:
    case IrType::V256:
      return IrType::Vector;
    default:
      return t;
  }
}

std::string_view token_name(AbstractToken t) { return kTokenNames[static_cast<std::size_t>(t)]; }

std::optional<AbstractToken> parse_token(std::string_view s) {
  for (std::size_t i = 0; i < kTokenNames.size(); ++i) {
    if (kTokenNames[i] == s) return static_cast<AbstractToken>(i);
  }
  return std::nullopt;
}

bool operator==(const FloatConst& a, const FloatConst& b) {
  return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
}

const BasicBlock* IrFunction::find_block(std::uint32_t id) const {
  if (id < blocks.size() && blocks[id].id == id) return &blocks[id];
  for (const auto& b : blocks) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::size_t IrFunction::statement_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.statements.size();
  return n;
}

const IrFunction* Program::find_function(std::string_view fname) const {
  for (const auto& f : functions) {
    if (f.name == fname) return &f;
  }
  return nullptr;
}

std::optional<std::uint32_t> defined_tmp(const Statement& s) {
  if (const auto* a = std::get_if<TmpAssign>(&s)) return a->tmp;
  if (const auto* c = std::get_if<Call>(&s); c && c->result) return c->result->tmp;
  return std::nullopt;
}

std::optional<IrType> statement_type(const Statement& s) {
  if (const auto* a = std::get_if<TmpAssign>(&s)) return a->type;
  if (const auto* c = std::get_if<Call>(&s); c && c->result) return c->result->type;
  return std::nullopt;
}

}  // namespace peepvec
