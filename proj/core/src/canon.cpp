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

#include "peepvec/canon.hpp"

#include <bit>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace peepvec {

namespace {

constexpr int128 kInt128Min = static_cast<int128>(static_cast<unsigned __int128>(1) << 127);

bool is_negative_const(const Operand& o) {
  const auto* c = std::get_if<IntConst>(&o);
  return c != nullptr && c->value < 0 && c->value != kInt128Min;
}

class Canonicalizer {
 public:
  Canonicalizer(const IrFunction& f, const OpcodeTable& table,
                std::vector<CanonDiagnostic>* diags)
      : f_(f), table_(table), diags_(diags) {}

  IrFunction run() {
    collect();
    IrFunction out;
    out.name = f_.name;
    out.address = f_.address;
    out.strings = f_.strings;
    out.extern_calls = f_.extern_calls;
    out.entry = f_.entry;
    for (const auto& b : f_.blocks) {
      BasicBlock nb{b.id, {}, b.successors};
      for (std::size_t i = 0; i < b.statements.size(); ++i) {
        const Statement& s = b.statements[i];
        if (auto t = defined_tmp(s); t && (alias_.count(*t) != 0 || chained_.count(*t) != 0)) {
          continue;
        }
        nb.statements.push_back(rewrite(s, b.id, i));
      }
      out.blocks.push_back(std::move(nb));
    }
    return out;
  }

 private:
  // Canonical entry for a raw opcode, or nullptr for table gaps.
  const OpcodeEntry* lookup(const std::string& raw) const {
    if (raw == kUnknownOpcode) return nullptr;
    return table_.find(raw);
  }

  bool is_cast(const OpExpr& op) const {
    const OpcodeEntry* e = lookup(op.opcode);
    return e != nullptr && e->canonical == kCastOpcode && op.args.size() == 1;
  }

  void collect() {
    std::unordered_map<std::uint32_t, Operand> cast_src;
    for (const auto& b : f_.blocks) {
      for (const auto& s : b.statements) {
        const auto* a = std::get_if<TmpAssign>(&s);
        if (a == nullptr || a->tmp == kAbstractId) continue;
        if (const auto* op = std::get_if<OpExpr>(&a->expr); op != nullptr && is_cast(*op)) {
          cast_src.emplace(a->tmp, op->args[0]);
        }
        if (const auto* ld = std::get_if<Load>(&a->expr)) load_addr_.emplace(a->tmp, ld->addr);
      }
    }
    // Resolve cast chains; a chain that loops back on itself is left alone.
    for (const auto& [tmp, src] : cast_src) {
      Operand cur = src;
      std::unordered_set<std::uint32_t> seen{tmp};
      bool cyclic = false;
      while (const auto* t = std::get_if<TmpRef>(&cur)) {
        auto it = cast_src.find(t->id);
        if (it == cast_src.end()) break;
        if (!seen.insert(t->id).second) {
          cyclic = true;
          break;
        }
        cur = it->second;
      }
      if (!cyclic) alias_.emplace(tmp, cur);
    }
    // A loaded tmp is chained when every use is as a load/store address.
    std::unordered_map<std::uint32_t, std::size_t> addr_uses;
    std::unordered_set<std::uint32_t> other_uses;
    auto note = [&](const Operand& o, bool as_addr) {
      const Operand r = resolve(o);
      if (const auto* t = std::get_if<TmpRef>(&r)) {
        if (as_addr) {
          ++addr_uses[t->id];
        } else {
          other_uses.insert(t->id);
        }
      }
    };
    for (const auto& b : f_.blocks) {
      for (const auto& s : b.statements) {
        if (auto t = defined_tmp(s); t && alias_.count(*t) != 0) continue;
        const Operand* addr = nullptr;
        if (const auto* st = std::get_if<Store>(&s)) {
          addr = &st->addr;
        } else if (const auto* a = std::get_if<TmpAssign>(&s)) {
          if (const auto* ld = std::get_if<Load>(&a->expr)) addr = &ld->addr;
        }
        for_each_operand(s, [&](const Operand& o) { note(o, &o == addr); });
      }
    }
    for (const auto& [tmp, n] : addr_uses) {
      if (n > 0 && other_uses.count(tmp) == 0 && load_addr_.count(tmp) != 0) {
        chained_.insert(tmp);
      }
    }
  }

  Operand resolve(const Operand& o) const {
    if (const auto* t = std::get_if<TmpRef>(&o)) {
      auto it = alias_.find(t->id);
      if (it != alias_.end()) return it->second;
    }
    return o;
  }

  std::string address_key(const Operand& raw, int depth = 0) const {
    const Operand o = resolve(raw);
    return std::visit(
        Overloaded{
            [&](const TmpRef& t) -> std::string {
              if (depth < 64 && chained_.count(t.id) != 0) {
                return "*(" + address_key(load_addr_.at(t.id), depth + 1) + ")";
              }
              return "t" + std::to_string(t.id);
            },
            [](const IntConst& c) -> std::string {
              return "c" + std::to_string(static_cast<std::uint64_t>(c.value));
            },
            [](const FloatConst& c) -> std::string {
              return "f" + std::to_string(std::bit_cast<std::uint64_t>(c.value));
            },
            [](const RegRef& r) -> std::string { return "r" + std::to_string(r.id); },
            [](const MemRef& m) -> std::string { return "M" + std::to_string(m.id); },
            [](const Abstract& a) -> std::string { return std::string(token_name(a.token)); },
        },
        o);
  }

  Operand address(const Operand& o) {
    auto [it, inserted] =
        mem_ids_.emplace(address_key(o), static_cast<std::uint32_t>(mem_ids_.size()));
    (void)inserted;
    return MemRef{it->second};
  }

  Operand value(const Operand& raw) const {
    Operand o = resolve(raw);
    if (auto* c = std::get_if<IntConst>(&o)) c->type = type_class(c->type);
    return o;
  }

  std::vector<Operand> values(const std::vector<Operand>& in) const {
    std::vector<Operand> out;
    out.reserve(in.size());
    for (const auto& o : in) out.push_back(value(o));
    return out;
  }

  Expression rewrite_expr(const Expression& e, std::uint32_t block, std::size_t idx) {
    return std::visit(
        Overloaded{
            [](const GetReg& g) -> Expression { return GetReg{g.reg, type_class(g.type)}; },
            [](const GetRegI& g) -> Expression { return GetRegI{g.reg, type_class(g.type)}; },
            [&](const Load& l) -> Expression { return Load{address(l.addr), type_class(l.type)}; },
            [&](const ConstExpr& c) -> Expression { return ConstExpr{value(c.value)}; },
            [&](const OpExpr& op) -> Expression {
              OpExpr out{std::string(kUnknownOpcode), values(op.args)};
              const OpcodeEntry* entry = lookup(op.opcode);
              const OpInfo* info = entry != nullptr ? find_op(entry->canonical) : nullptr;
              if (info != nullptr &&
                  static_cast<std::size_t>(info->arity) == op.args.size()) {
                out.opcode = entry->canonical;
              } else if (diags_ != nullptr) {
                diags_->push_back({f_.name, block, idx, op.opcode});
              }
              negative_constant_rule(out);
              return out;
            },
        },
        e);
  }

  // add(x, -n) -> sub(x, n) and sub(x, -n) -> add(x, n), operand positions
  // kept. Applies only when exactly one operand is a negative constant.
  static void negative_constant_rule(OpExpr& op) {
    if ((op.opcode != "add" && op.opcode != "sub") || op.args.size() != 2) return;
    const bool n0 = is_negative_const(op.args[0]);
    const bool n1 = is_negative_const(op.args[1]);
    if (n0 == n1) return;
    auto& c = std::get<IntConst>(op.args[n0 ? 0 : 1]);
    c.value = -c.value;
    op.opcode = op.opcode == "add" ? "sub" : "add";
  }

  Statement rewrite(const Statement& s, std::uint32_t block, std::size_t idx) {
    return std::visit(
        Overloaded{
            [&](const TmpAssign& a) -> Statement {
              return TmpAssign{a.tmp, type_class(a.type), rewrite_expr(a.expr, block, idx)};
            },
            [&](const PutReg& p) -> Statement { return PutReg{p.reg, value(p.value)}; },
            [&](const PutRegI& p) -> Statement { return PutRegI{p.reg, value(p.value)}; },
            [&](const Store& st) -> Statement {
              Operand addr = address(st.addr);
              return Store{std::move(addr), value(st.value)};
            },
            [&](const Call& c) -> Statement {
              Call out = c;
              if (out.result) out.result->type = type_class(out.result->type);
              out.args = values(c.args);
              return out;
            },
        },
        s);
  }

  const IrFunction& f_;
  const OpcodeTable& table_;
  std::vector<CanonDiagnostic>* diags_;
  std::unordered_map<std::uint32_t, Operand> alias_;     // removed cast -> source
  std::unordered_map<std::uint32_t, Operand> load_addr_;  // loaded tmp -> address
  std::unordered_set<std::uint32_t> chained_;            // loads folded into addresses
  std::unordered_map<std::string, std::uint32_t> mem_ids_;
};

Operand abstract_operand(const Operand& o) {
  return std::visit(
      Overloaded{
          [](const TmpRef&) { return Abstract{AbstractToken::Var}; },
          [](const IntConst&) { return Abstract{AbstractToken::Const}; },
          [](const FloatConst&) { return Abstract{AbstractToken::Const}; },
          [](const RegRef&) { return Abstract{AbstractToken::Reg}; },
          [](const MemRef&) { return Abstract{AbstractToken::Mem}; },
          [](const Abstract& a) { return a; },
      },
      o);
}

}  // namespace

IrFunction canonicalize_function(const IrFunction& f, const OpcodeTable& table,
                                 std::vector<CanonDiagnostic>* diagnostics) {
  return Canonicalizer(f, table, diagnostics).run();
}

Program canonicalize_program(const Program& p, const OpcodeTable& table,
                             std::vector<CanonDiagnostic>* diagnostics) {
  Program out{p.name, {}};
  out.functions.reserve(p.functions.size());
  for (const auto& f : p.functions) out.functions.push_back(canonicalize_function(f, table, diagnostics));
  return out;
}

Statement abstract_statement(const Statement& s) {
  Statement out = s;
  for_each_operand(out, [](Operand& o) { o = abstract_operand(o); });
  std::visit(Overloaded{
                 [](TmpAssign& a) {
                   a.tmp = kAbstractId;
                   if (auto* g = std::get_if<GetReg>(&a.expr)) g->reg = kAbstractId;
                   if (auto* g = std::get_if<GetRegI>(&a.expr)) g->reg = kAbstractId;
                 },
                 [](PutReg& p) { p.reg = kAbstractId; },
                 [](PutRegI& p) { p.reg = kAbstractId; },
                 [](Store&) {},
                 [](Call& c) {
                   c.callee = "FUNC";
                   if (c.result) c.result->tmp = kAbstractId;
                 },
             },
             out);
  return out;
}

Peephole abstract_operands(const Peephole& p) {
  Peephole out;
  out.block_ids = p.block_ids;
  out.statements.reserve(p.statements.size());
  for (const auto& s : p.statements) out.statements.push_back(abstract_statement(s));
  return out;
}

}  // namespace peepvec
