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

#include "peepvec/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "peepvec/rng.hpp"
#include "peepvec/text.hpp"

namespace peepvec {

namespace {

constexpr std::array<std::uint32_t, 12> kIntRegs = {16, 24, 32, 40, 48, 56, 64, 72, 80, 88, 96, 104};
constexpr std::array<std::uint32_t, 4> kVecRegs = {224, 240, 256, 272};
constexpr std::array<std::string_view, 8> kExterns = {"memcpy", "strlen", "malloc", "free",
                                                       "printf", "puts",   "fopen",  "abort"};
constexpr std::array<std::string_view, 10> kWords = {
    "usage: %s [options]", "out of memory", "filename", "cannot open %s", "invalid argument",
    "version 1.0",         "error: %d",     "input",    "done",           "write failed"};

template <class T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& a) {
  return a[rng.uniform(N)];
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.uniform(v.size())];
}

IntConst int_const(std::int64_t v, IrType t = IrType::I64) { return IntConst{v, t}; }

// Weighted choice over a small table of kinds.
template <std::size_t N>
std::size_t weighted(Rng& rng, const std::array<unsigned, N>& w) {
  unsigned total = 0;
  for (unsigned x : w) total += x;
  auto r = static_cast<unsigned>(rng.uniform(total));
  for (std::size_t i = 0; i < N; ++i) {
    if (r < w[i]) return i;
    r -= w[i];
  }
  return N - 1;
}

// ---- raw function statements ------------------------------------------------

class FunctionGen {
 public:
  FunctionGen(std::uint64_t seed, IrFunction& f) : rng_(seed), f_(f) {}

  void fill_block(BasicBlock& b, std::size_t n) {
    pool_.clear();
    out_ = &b.statements;
    while (out_->size() < n) emit(n - out_->size());
  }

  Rng& rng() { return rng_; }

 private:
  enum Kind { kIntOp, kNarrow, kOp32, kWiden, kUnary, kGet, kPut, kLoad, kStore, kFloat, kVector,
              kIte, kCall, kNumKinds };

  std::uint32_t fresh(IrType t) {
    const std::uint32_t id = next_tmp_++;
    pool_[t].push_back(id);
    return id;
  }

  const std::vector<std::uint32_t>* tmps(IrType t) const {
    auto it = pool_.find(t);
    return it == pool_.end() || it->second.empty() ? nullptr : &it->second;
  }

  void push(Statement s) { out_->push_back(std::move(s)); }

  // An I64 tmp, emitting a register read first if the block has none.
  Operand int64(std::size_t& budget) {
    if (const auto* v = tmps(IrType::I64); v != nullptr && (budget <= 1 || rng_.bernoulli(0.85))) {
      return TmpRef{pick(rng_, *v)};
    }
    const std::uint32_t t = fresh(IrType::I64);
    push(TmpAssign{t, IrType::I64, GetReg{pick(rng_, kIntRegs), IrType::I64}});
    --budget;
    return TmpRef{t};
  }

  Operand small_const() {
    static constexpr std::array<std::int64_t, 10> kConsts = {1, 2, 4, 8, 3, 16, 0xff, -1, -8, 0x40};
    return int_const(pick(rng_, kConsts));
  }

  void emit(std::size_t budget) {
    static constexpr std::array<unsigned, kNumKinds> kWeights = {30, 4, 4, 4, 4, 10, 10,
                                                                 10, 8,  6, 3, 2,  3};
    const auto kind = static_cast<Kind>(weighted(rng_, kWeights));
    switch (kind) {
      case kIntOp: {
        static constexpr std::array<std::string_view, 14> kOps = {
            "Add64", "Sub64", "Mul64",   "And64",   "Or64",     "Xor64",  "Shl64",
            "Shr64", "Sar64", "CmpEQ64", "CmpNE64", "CmpLT64S", "Max64U", "Add64"};
        const std::string_view op = pick(rng_, kOps);
        Operand a = int64(budget);
        Operand b;
        if (op.starts_with("Sh") || op.starts_with("Sa")) {
          b = int_const(1 + static_cast<std::int64_t>(rng_.uniform(8)), IrType::I8);
        } else if (rng_.bernoulli(0.5)) {
          b = small_const();
        } else {
          b = int64(budget);
        }
        if (budget == 0) return;
        const IrType t = op.starts_with("Cmp") ? IrType::I8 : IrType::I64;
        const std::uint32_t d = t == IrType::I64 ? fresh(t) : next_tmp_++;
        push(TmpAssign{d, t, OpExpr{std::string(op), {a, b}}});
        return;
      }
      case kNarrow: {
        Operand a = int64(budget);
        if (budget == 0) return;
        push(TmpAssign{fresh(IrType::I32), IrType::I32, OpExpr{"64to32", {a}}});
        return;
      }
      case kOp32: {
        const auto* v = tmps(IrType::I32);
        if (v == nullptr) return emit_narrow(budget);
        static constexpr std::array<std::string_view, 5> kOps = {"Add32", "Sub32", "Mul32",
                                                                 "Xor32", "And32"};
        Operand b = rng_.bernoulli(0.5) ? Operand(int_const(pick(rng_, std::array<std::int64_t, 4>{
                                                                1, 2, 7, -4}),
                                                            IrType::I32))
                                        : Operand(TmpRef{pick(rng_, *v)});
        Operand a = TmpRef{pick(rng_, *v)};
        push(TmpAssign{fresh(IrType::I32), IrType::I32, OpExpr{std::string(pick(rng_, kOps)), {a, b}}});
        return;
      }
      case kWiden: {
        const auto* v = tmps(IrType::I32);
        if (v == nullptr) return emit_narrow(budget);
        Operand a = TmpRef{pick(rng_, *v)};
        push(TmpAssign{fresh(IrType::I64), IrType::I64,
                       OpExpr{rng_.bernoulli(0.5) ? "32Uto64" : "32Sto64", {a}}});
        return;
      }
      case kUnary: {
        static constexpr std::array<std::string_view, 4> kOps = {"Not64", "Neg64", "Clz64",
                                                                 "PopCount64"};
        Operand a = int64(budget);
        if (budget == 0) return;
        push(TmpAssign{fresh(IrType::I64), IrType::I64, OpExpr{std::string(pick(rng_, kOps)), {a}}});
        return;
      }
      case kGet:
        push(TmpAssign{fresh(IrType::I64), IrType::I64, GetReg{pick(rng_, kIntRegs), IrType::I64}});
        return;
      case kPut: {
        Operand v = int64(budget);
        if (budget == 0) return;
        push(PutReg{pick(rng_, kIntRegs), v});
        return;
      }
      case kLoad: {
        Operand addr = address(budget);
        if (budget == 0) return;
        const std::uint32_t d = fresh(IrType::I64);
        push(TmpAssign{d, IrType::I64, Load{addr, IrType::I64}});
        loaded_.push_back(d);
        return;
      }
      case kStore: {
        Operand addr = address(budget);
        if (budget == 0) return;
        Operand v = rng_.bernoulli(0.2) ? small_const() : int64(budget);
        if (budget == 0) return;
        push(Store{addr, v});
        return;
      }
      case kFloat: {
        const auto* v = tmps(IrType::F64);
        if (v == nullptr || budget <= 1 || rng_.bernoulli(0.3)) {
          Operand a = int64(budget);
          if (budget == 0) return;
          push(TmpAssign{fresh(IrType::F64), IrType::F64, OpExpr{"I64StoF64", {a}}});
          return;
        }
        if (rng_.bernoulli(0.3)) {
          push(TmpAssign{fresh(IrType::I64), IrType::I64, OpExpr{"F64toI64S", {TmpRef{pick(rng_, *v)}}}});
          return;
        }
        static constexpr std::array<std::string_view, 4> kOps = {"AddF64", "SubF64", "MulF64",
                                                                 "DivF64"};
        Operand a = TmpRef{pick(rng_, *v)};
        Operand b = rng_.bernoulli(0.3) ? Operand(FloatConst{0.5 * static_cast<double>(1 + rng_.uniform(8))})
                                        : Operand(TmpRef{pick(rng_, *v)});
        push(TmpAssign{fresh(IrType::F64), IrType::F64, OpExpr{std::string(pick(rng_, kOps)), {a, b}}});
        return;
      }
      case kVector: {
        const auto* v = tmps(IrType::V128);
        if (v == nullptr || rng_.bernoulli(0.3)) {
          push(TmpAssign{fresh(IrType::V128), IrType::V128, GetReg{pick(rng_, kVecRegs), IrType::V128}});
          return;
        }
        if (rng_.bernoulli(0.3)) {
          push(PutReg{pick(rng_, kVecRegs), TmpRef{pick(rng_, *v)}});
          return;
        }
        static constexpr std::array<std::string_view, 4> kOps = {"Add32x4", "XorV128", "Mul32x4",
                                                                 "InterleaveLO64x2"};
        Operand a = TmpRef{pick(rng_, *v)};
        Operand b = TmpRef{pick(rng_, *v)};
        push(TmpAssign{fresh(IrType::V128), IrType::V128, OpExpr{std::string(pick(rng_, kOps)), {a, b}}});
        return;
      }
      case kIte: {
        if (budget < 4) return emit_get();
        Operand a = int64(budget);
        Operand b = int64(budget);
        const std::uint32_t cond = next_tmp_++;
        push(TmpAssign{cond, IrType::I8, OpExpr{"CmpLT64U", {a, b}}});
        --budget;
        push(TmpAssign{fresh(IrType::I64), IrType::I64, OpExpr{"ITE", {TmpRef{cond}, a, b}}});
        return;
      }
      case kCall: {
        const std::string name(pick(rng_, kExterns));
        if (std::find(f_.extern_calls.begin(), f_.extern_calls.end(), name) == f_.extern_calls.end()) {
          f_.extern_calls.push_back(name);
        }
        Call c;
        c.callee = name;
        c.external = true;
        const std::size_t nargs = rng_.uniform(3);
        for (std::size_t i = 0; i < nargs && budget > 1; ++i) c.args.push_back(int64(budget));
        if (rng_.bernoulli(0.5)) c.result = CallResult{fresh(IrType::I64), IrType::I64};
        push(std::move(c));
        return;
      }
      case kNumKinds:
        break;
    }
  }

  void emit_narrow(std::size_t budget) {
    Operand a = int64(budget);
    if (budget == 0) return;
    push(TmpAssign{fresh(IrType::I32), IrType::I32, OpExpr{"64to32", {a}}});
  }

  void emit_get() {
    push(TmpAssign{fresh(IrType::I64), IrType::I64, GetReg{pick(rng_, kIntRegs), IrType::I64}});
  }

  // A load/store address: a constant global, a tmp (possibly itself loaded,
  // giving a pointer chain) or an offset from a register value.
  Operand address(std::size_t& budget) {
    const auto r = rng_.uniform(10);
    if (r < 3) return int_const(0x601000 + 8 * static_cast<std::int64_t>(rng_.uniform(16)));
    if (r < 5 && !loaded_.empty()) {
      const std::uint32_t t = pick(rng_, loaded_);
      // Only tmps of the current block are in scope.
      const auto* v = tmps(IrType::I64);
      if (v != nullptr && std::find(v->begin(), v->end(), t) != v->end()) return TmpRef{t};
    }
    return int64(budget);
  }

  Rng rng_;
  IrFunction& f_;
  std::uint32_t next_tmp_ = 0;
  std::map<IrType, std::vector<std::uint32_t>> pool_;
  std::vector<std::uint32_t> loaded_;
  std::vector<Statement>* out_ = nullptr;
};

// ---- variants ---------------------------------------------------------------

std::uint32_t max_tmp(const IrFunction& f) {
  std::uint32_t m = 0;
  bool any = false;
  for (const auto& b : f.blocks) {
    for (const auto& s : b.statements) {
      if (auto t = defined_tmp(s)) {
        m = std::max(m, *t);
        any = true;
      }
      for_each_operand(s, [&](const Operand& o) {
        if (const auto* t = std::get_if<TmpRef>(&o)) {
          m = std::max(m, t->id);
          any = true;
        }
      });
    }
  }
  return any ? m + 1 : 0;
}

void substitute(Statement& s, const std::unordered_map<std::uint32_t, std::uint32_t>& sub) {
  for_each_operand(s, [&](Operand& o) {
    if (auto* t = std::get_if<TmpRef>(&o)) {
      if (auto it = sub.find(t->id); it != sub.end()) t->id = it->second;
    }
  });
}

bool is_integer_type(IrType t) {
  return t == IrType::I8 || t == IrType::I16 || t == IrType::I32 || t == IrType::I64;
}

void insert_junk(IrFunction& f, double rate, Rng& rng) {
  std::uint32_t next = max_tmp(f);
  for (auto& b : f.blocks) {
    std::vector<Statement> out;
    out.reserve(b.statements.size() * 2);
    std::unordered_map<std::uint32_t, std::uint32_t> sub;
    for (Statement s : b.statements) {
      substitute(s, sub);
      if (const auto* p = std::get_if<PutReg>(&s); p != nullptr && rng.bernoulli(rate / 3)) {
        out.push_back(PutReg{p->reg, int_const(static_cast<std::int64_t>(rng.uniform(100)))});
      }
      out.push_back(s);
      const auto* a = std::get_if<TmpAssign>(&s);
      if (a == nullptr) continue;
      if (rng.bernoulli(rate / 3)) {
        const std::uint32_t u = next++;
        out.push_back(TmpAssign{u, a->type, ConstExpr{TmpRef{a->tmp}}});
        sub[a->tmp] = u;
      } else if (is_integer_type(a->type) && rng.bernoulli(rate / 3)) {
        const std::string op = "Add" + std::string(type_name(a->type)).substr(1);
        out.push_back(TmpAssign{next++, a->type, OpExpr{op, {TmpRef{a->tmp}, int_const(1, a->type)}}});
      }
    }
    b.statements = std::move(out);
  }
}

// Width suffix of an integer opcode such as Mul32, or empty.
std::string width_of(const std::string& op, std::string_view prefix) {
  if (!op.starts_with(prefix)) return {};
  const std::string w = op.substr(prefix.size());
  return (w == "8" || w == "16" || w == "32" || w == "64") ? w : std::string();
}

IrType int_type(const std::string& w) {
  if (w == "8") return IrType::I8;
  if (w == "16") return IrType::I16;
  if (w == "32") return IrType::I32;
  return IrType::I64;
}

void reexpress(IrFunction& f, double rate, Rng& rng) {
  for (auto& b : f.blocks) {
    for (auto& s : b.statements) {
      auto* a = std::get_if<TmpAssign>(&s);
      auto* op = a != nullptr ? std::get_if<OpExpr>(&a->expr) : nullptr;
      if (op == nullptr || op->args.size() != 2) continue;
      auto* c = std::get_if<IntConst>(&op->args[1]);
      if (c == nullptr) continue;
      if (auto w = width_of(op->opcode, "Mul"); !w.empty() && c->value == 2 && rng.bernoulli(rate)) {
        op->opcode = "Shl" + w;
        *c = int_const(1, IrType::I8);
      } else if (auto w = width_of(op->opcode, "Shl"); !w.empty() && c->value == 1 &&
                 rng.bernoulli(rate)) {
        op->opcode = "Mul" + w;
        *c = int_const(2, int_type(w));
      } else if (auto w = width_of(op->opcode, "Add"); !w.empty() && rng.bernoulli(rate)) {
        op->opcode = "Sub" + w;
        c->value = -c->value;
      } else if (auto w = width_of(op->opcode, "Sub"); !w.empty() && rng.bernoulli(rate)) {
        op->opcode = "Add" + w;
        c->value = -c->value;
      }
    }
  }
}

// Resources a statement touches, for the reordering dependence test.
struct Access {
  std::vector<std::uint32_t> tmp_reads;
  std::optional<std::uint32_t> tmp_def;
  std::vector<std::uint64_t> reg_reads;
  std::vector<std::uint64_t> reg_writes;
  bool mem_read = false;
  bool mem_write = false;
  bool barrier = false;
};

Access access_of(const Statement& s) {
  Access acc;
  acc.tmp_def = defined_tmp(s);
  constexpr std::uint64_t kIndexed = 1ull << 32;
  for_each_operand(s, [&](const Operand& o) {
    if (const auto* t = std::get_if<TmpRef>(&o)) acc.tmp_reads.push_back(t->id);
    if (const auto* r = std::get_if<RegRef>(&o)) acc.reg_reads.push_back(r->id);
  });
  std::visit(Overloaded{
                 [&](const TmpAssign& a) {
                   if (const auto* g = std::get_if<GetReg>(&a.expr)) acc.reg_reads.push_back(g->reg);
                   if (const auto* g = std::get_if<GetRegI>(&a.expr)) {
                     acc.reg_reads.push_back(kIndexed | g->reg);
                   }
                   if (std::holds_alternative<Load>(a.expr)) acc.mem_read = true;
                 },
                 [&](const PutReg& p) { acc.reg_writes.push_back(p.reg); },
                 [&](const PutRegI& p) { acc.reg_writes.push_back(kIndexed | p.reg); },
                 [&](const Store&) { acc.mem_write = true; },
                 [&](const Call&) { acc.barrier = true; },
             },
             s);
  return acc;
}

bool intersects(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  for (auto x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

bool depends(const Access& x, const Access& y) {
  if (x.barrier || y.barrier) return true;
  auto reads = [](const Access& a, std::uint32_t t) {
    return std::find(a.tmp_reads.begin(), a.tmp_reads.end(), t) != a.tmp_reads.end();
  };
  if (x.tmp_def && (reads(y, *x.tmp_def) || y.tmp_def == x.tmp_def)) return true;
  if (y.tmp_def && reads(x, *y.tmp_def)) return true;
  if (intersects(x.reg_writes, y.reg_reads) || intersects(x.reg_writes, y.reg_writes) ||
      intersects(x.reg_reads, y.reg_writes)) {
    return true;
  }
  return (x.mem_write && (y.mem_read || y.mem_write)) || (x.mem_read && y.mem_write);
}

void reorder(IrFunction& f, double intensity, Rng& rng) {
  for (auto& b : f.blocks) {
    const std::size_t n = b.statements.size();
    if (n < 2) continue;
    std::vector<Access> acc;
    acc.reserve(n);
    for (const auto& s : b.statements) acc.push_back(access_of(s));
    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<std::size_t>> succs(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (depends(acc[i], acc[j])) {
          succs[i].push_back(j);
          ++pending[j];
        }
      }
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] == 0) ready.push_back(i);
    }
    std::vector<Statement> out;
    out.reserve(n);
    while (!ready.empty()) {
      std::sort(ready.begin(), ready.end());
      const std::size_t pos = rng.bernoulli(intensity) ? rng.uniform(ready.size()) : 0;
      const std::size_t i = ready[pos];
      ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pos));
      out.push_back(std::move(b.statements[i]));
      for (std::size_t j : succs[i]) {
        if (--pending[j] == 0) ready.push_back(j);
      }
    }
    b.statements = std::move(out);
  }
}

void split_blocks(IrFunction& f, double rate, Rng& rng, VariantInfo& info) {
  const std::size_t base = f.blocks.size();
  for (std::size_t i = 0; i < base; ++i) {
    BasicBlock& b = f.blocks[i];
    if (b.statements.size() < 2 || !rng.bernoulli(rate)) continue;
    const std::size_t cut = 1 + rng.uniform(b.statements.size() - 1);
    BasicBlock tail;
    tail.id = static_cast<std::uint32_t>(f.blocks.size());
    tail.statements.assign(std::make_move_iterator(b.statements.begin() + static_cast<std::ptrdiff_t>(cut)),
                           std::make_move_iterator(b.statements.end()));
    b.statements.resize(cut);
    tail.successors = std::move(b.successors);
    b.successors = {tail.id};
    info.block_map[i].push_back(tail.id);
    f.blocks.push_back(std::move(tail));
  }
}

void rename_tmps(IrFunction& f, Rng& rng) {
  const std::uint32_t n = max_tmp(f);
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm.begin(), perm.end());
  for (auto& b : f.blocks) {
    for (auto& s : b.statements) {
      for_each_operand(s, [&](Operand& o) {
        if (auto* t = std::get_if<TmpRef>(&o)) t->id = perm[t->id];
      });
      if (auto* a = std::get_if<TmpAssign>(&s)) a->tmp = perm[a->tmp];
      if (auto* c = std::get_if<Call>(&s); c != nullptr && c->result) {
        c->result->tmp = perm[c->result->tmp];
      }
    }
  }
}

void rename_regs(IrFunction& f, Rng& rng, VariantInfo& info) {
  std::vector<std::uint32_t> regs;
  auto note = [&](std::uint32_t r) { regs.push_back(r); };
  for (const auto& b : f.blocks) {
    for (const auto& s : b.statements) {
      std::visit(Overloaded{
                     [&](const TmpAssign& a) {
                       if (const auto* g = std::get_if<GetReg>(&a.expr)) note(g->reg);
                       if (const auto* g = std::get_if<GetRegI>(&a.expr)) note(g->reg);
                     },
                     [&](const PutReg& p) { note(p.reg); },
                     [&](const PutRegI& p) { note(p.reg); },
                     [](const auto&) {},
                 },
                 s);
      for_each_operand(s, [&](const Operand& o) {
        if (const auto* r = std::get_if<RegRef>(&o)) note(r->id);
      });
    }
  }
  std::sort(regs.begin(), regs.end());
  regs.erase(std::unique(regs.begin(), regs.end()), regs.end());
  std::vector<std::uint32_t> perm = regs;
  rng.shuffle(perm.begin(), perm.end());
  for (std::size_t i = 0; i < regs.size(); ++i) info.reg_map[regs[i]] = perm[i];
  auto map = [&](std::uint32_t& r) { r = info.reg_map.at(r); };
  for (auto& b : f.blocks) {
    for (auto& s : b.statements) {
      std::visit(Overloaded{
                     [&](TmpAssign& a) {
                       if (auto* g = std::get_if<GetReg>(&a.expr)) map(g->reg);
                       if (auto* g = std::get_if<GetRegI>(&a.expr)) map(g->reg);
                     },
                     [&](PutReg& p) { map(p.reg); },
                     [&](PutRegI& p) { map(p.reg); },
                     [](auto&) {},
                 },
                 s);
      for_each_operand(s, [&](Operand& o) {
        if (auto* r = std::get_if<RegRef>(&o)) map(r->id);
      });
    }
  }
}

void check_rate(double r, const char* what) {
  if (!(r >= 0 && r <= 1)) {
    throw std::invalid_argument(std::string("variation rate '") + what + "' must be in [0, 1]");
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

IrFunction random_cfg(std::uint64_t seed, std::size_t n, double edge_ratio) {
  if (n == 0) throw std::invalid_argument("random_cfg needs at least one block");
  Rng rng(seed);
  IrFunction f;
  f.name = "cfg";
  f.blocks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.blocks[i].id = static_cast<std::uint32_t>(i);
    f.blocks[i].statements.push_back(PutReg{16, int_const(static_cast<std::int64_t>(i))});
  }
  // Spanning tree rooted at block 0, then extra edges (mostly forward, some
  // loops) until the edge/block target is reached.
  auto room = [&](std::size_t b) { return f.blocks[b].successors.size() < 2; };
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t parent = rng.bernoulli(0.5) ? i - 1 : rng.uniform(i);
    if (!room(parent)) parent = room(i - 1) ? i - 1 : 0;
    while (!room(parent)) ++parent;
    f.blocks[parent].successors.push_back(static_cast<std::uint32_t>(i));
  }
  std::size_t edges = n - 1;
  const auto target = std::min<std::size_t>(2 * n, static_cast<std::size_t>(std::llround(edge_ratio * static_cast<double>(n))));
  for (std::size_t attempts = 0; edges < target && attempts < 50 * n; ++attempts) {
    const auto src = rng.uniform(n);
    const auto dst = static_cast<std::uint32_t>(rng.bernoulli(0.1) ? rng.uniform(src + 1) : src + rng.uniform(n - src));
    auto& succ = f.blocks[src].successors;
    if (succ.size() >= 2 || std::find(succ.begin(), succ.end(), dst) != succ.end()) continue;
    succ.push_back(dst);
    ++edges;
  }
  return f;
}

IrFunction gen_function(std::uint64_t seed, std::size_t size, std::string name) {
  if (size == 0) throw std::invalid_argument("gen_function needs size >= 1");
  Rng rng(seed);
  std::size_t nb = 1;
  if (size > 3) {
    const double per_block = rng.uniform(4.0, 8.0);
    nb = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(static_cast<double>(size) / per_block)), 1, size);
  }
  IrFunction f = random_cfg(rng.next(), nb, rng.uniform(1.3, 1.4));
  f.name = std::move(name);
  f.address = 0x401000 + 0x10 * (rng.next() & 0xFFFFF);
  std::vector<std::size_t> counts(nb, 1);
  for (std::size_t i = nb; i < size; ++i) ++counts[rng.uniform(nb)];
  FunctionGen gen(rng.next(), f);
  for (std::size_t i = 0; i < nb; ++i) {
    f.blocks[i].statements.clear();
    gen.fill_block(f.blocks[i], counts[i]);
  }
  if (rng.bernoulli(0.6)) {
    const std::size_t ns = 1 + rng.uniform(3);
    for (std::size_t i = 0; i < ns; ++i) {
      std::string w(pick(rng, kWords));
      if (std::find(f.strings.begin(), f.strings.end(), w) == f.strings.end()) f.strings.push_back(w);
    }
  }
  return f;
}

std::vector<Statement> gen_peephole(std::uint64_t seed, std::size_t size,
                                    const PeepholeGenOptions& options) {
  Rng rng(seed);
  const std::size_t pool = options.tmp_pool != 0 ? options.tmp_pool : size / 2 + 4;
  auto tmp = [&] { return static_cast<std::uint32_t>(rng.uniform(pool)); };
  auto reg = [&] { return static_cast<std::uint32_t>(rng.uniform(6)); };
  auto constant = [&]() -> Operand {
    static constexpr std::array<std::int64_t, 8> kConsts = {0, 1, 2, 3, -1, 5, 0x10, 0x18};
    if (rng.bernoulli(0.1)) return FloatConst{0.25 * static_cast<double>(rng.uniform(16))};
    return int_const(pick(rng, kConsts), IrType::Int);
  };
  auto value = [&]() -> Operand {
    const auto r = rng.uniform(100);
    if (r < 60) return TmpRef{tmp()};
    if (r < 95 || !options.allow_reg_operands) return constant();
    return RegRef{reg()};
  };
  auto address = [&]() -> Operand {
    const auto r = rng.uniform(100);
    if (r < 50) return MemRef{static_cast<std::uint32_t>(rng.uniform(5))};
    if (r < 75) return TmpRef{tmp()};
    return int_const(0x10 + 8 * static_cast<std::int64_t>(rng.uniform(3)), IrType::Int);
  };
  auto type = [&] {
    const auto r = rng.uniform(100);
    if (r < 80) return IrType::Int;
    if (r < 92) return IrType::Double;
    return IrType::Vector;
  };
  static constexpr std::array<std::string_view, 26> kOps = {
      "add",  "sub",   "mul",    "and",  "or",    "xor",  "shl",   "shr",   "sar",
      "neg",  "not",   "cmpeq",  "cmplt", "max",  "min",  "popcnt", "div",  "divmod",
      "ite",  "addf",  "mulf",   "subf", "sqrtf", "itof", "addv",  "xorv"};
  static constexpr std::array<unsigned, 10> kWeights = {10, 3, 12, 30, 8, 10, 3, 10, 4, 0};
  std::vector<Statement> out;
  out.reserve(size);
  while (out.size() < size) {
    switch (weighted(rng, kWeights)) {
      case 0:
        out.push_back(TmpAssign{tmp(), type(), GetReg{reg(), IrType::Int}});
        break;
      case 1:
        out.push_back(TmpAssign{tmp(), IrType::Int, GetRegI{reg(), IrType::Int}});
        break;
      case 2:
        out.push_back(TmpAssign{tmp(), type(), Load{address(), IrType::Int}});
        break;
      case 3: {
        if (options.allow_unknown && rng.bernoulli(0.05)) {
          out.push_back(TmpAssign{tmp(), IrType::Int, OpExpr{std::string(kUnknownOpcode), {value()}}});
          break;
        }
        const std::string_view name = pick(rng, kOps);
        const OpInfo* info = find_op(name);
        OpExpr op{std::string(name), {}};
        for (int i = 0; i < info->arity; ++i) op.args.push_back(value());
        const IrType t = info->is_vector ? IrType::Vector
                                         : (name.ends_with("f") ? IrType::Double : IrType::Int);
        out.push_back(TmpAssign{tmp(), t, std::move(op)});
        break;
      }
      case 4:
        out.push_back(TmpAssign{tmp(), IrType::Int, ConstExpr{value()}});
        break;
      case 5:
        out.push_back(PutReg{reg(), value()});
        break;
      case 6:
        out.push_back(PutRegI{reg(), value()});
        break;
      case 7:
        out.push_back(Store{address(), value()});
        break;
      case 8: {
        Call c;
        c.callee = std::string(pick(rng, kExterns));
        c.external = true;
        const std::size_t nargs = rng.uniform(3);
        for (std::size_t i = 0; i < nargs; ++i) c.args.push_back(value());
        if (rng.bernoulli(0.5)) c.result = CallResult{tmp(), IrType::Int};
        out.push_back(std::move(c));
        break;
      }
      default:
        break;
    }
  }
  return out;
}

VariationProfile VariationProfile::full() {
  VariationProfile p;
  p.rename_tmps = true;
  p.rename_regs = true;
  p.reorder = 0.5;
  p.junk = 0.15;
  p.reexpress = 0.5;
  p.split_blocks = 0.2;
  return p;
}

IrFunction make_variant(const IrFunction& f, const VariationProfile& profile, std::uint64_t seed,
                        VariantInfo* info) {
  check_rate(profile.reorder, "reorder");
  check_rate(profile.junk, "junk");
  check_rate(profile.reexpress, "reexpress");
  check_rate(profile.split_blocks, "split_blocks");
  Rng rng(seed);
  VariantInfo local;
  local.block_map.resize(f.blocks.size());
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    local.block_map[i] = {f.blocks[i].id};
  }
  IrFunction out = f;
  if (profile.junk > 0) insert_junk(out, profile.junk, rng);
  if (profile.reexpress > 0) reexpress(out, profile.reexpress, rng);
  if (profile.reorder > 0) reorder(out, profile.reorder, rng);
  if (profile.split_blocks > 0) split_blocks(out, profile.split_blocks, rng, local);
  if (profile.rename_tmps) rename_tmps(out, rng);
  if (profile.rename_regs) rename_regs(out, rng, local);
  if (info != nullptr) *info = std::move(local);
  return out;
}

CorpusConfig parse_corpus_config(std::string_view text) {
  CorpusConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string l = trim(line);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("corpus config line " + std::to_string(line_no) + ": " + why);
    };
    if (eq == std::string::npos) fail("expected key=value");
    const std::string key = trim(l.substr(0, eq));
    const std::string val = trim(l.substr(eq + 1));
    try {
      std::size_t used = 0;
      auto num = [&] {
        const unsigned long long v = std::stoull(val, &used, 0);
        if (used != val.size()) fail("bad number '" + val + "'");
        return v;
      };
      auto real = [&] {
        const double v = std::stod(val, &used);
        if (used != val.size()) fail("bad number '" + val + "'");
        return v;
      };
      auto flag = [&] {
        if (val == "1" || val == "true") return true;
        if (val == "0" || val == "false") return false;
        fail("bad flag '" + val + "'");
        return false;
      };
      if (key == "groups") cfg.groups = num();
      else if (key == "variants") cfg.variants = num();
      else if (key == "min_size") cfg.min_size = num();
      else if (key == "max_size") cfg.max_size = num();
      else if (key == "internal_call_rate") cfg.internal_call_rate = real();
      else if (key == "seed") cfg.seed = num();
      else if (key == "rename_tmps") cfg.profile.rename_tmps = flag();
      else if (key == "rename_regs") cfg.profile.rename_regs = flag();
      else if (key == "reorder") cfg.profile.reorder = real();
      else if (key == "junk") cfg.profile.junk = real();
      else if (key == "reexpress") cfg.profile.reexpress = real();
      else if (key == "split_blocks") cfg.profile.split_blocks = real();
      else fail("unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      fail("bad value '" + val + "' for '" + key + "'");
    }
  }
  if (cfg.groups == 0 || cfg.variants == 0) throw std::runtime_error("corpus config: groups and variants must be positive");
  if (cfg.min_size == 0 || cfg.min_size > cfg.max_size) throw std::runtime_error("corpus config: need 1 <= min_size <= max_size");
  return cfg;
}

std::string group_name(std::size_t group) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%04zu", group);
  return buf;
}

std::string variant_function_name(std::size_t group, std::size_t variant) {
  return group_name(group) + "_v" + std::to_string(variant);
}

Corpus make_corpus(const CorpusConfig& cfg) {
  constexpr std::string_view kPlaceholder = "@";
  std::vector<IrFunction> bases;
  bases.reserve(cfg.groups);
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    Rng rng(hash_combine(cfg.seed, g));
    const std::size_t size = cfg.min_size + rng.uniform(cfg.max_size - cfg.min_size + 1);
    IrFunction f = gen_function(rng.next(), size, group_name(g));
    // Internal calls go to earlier groups, plus the odd self call, so the
    // call graph has both chains and cycles.
    const bool self = rng.bernoulli(0.03);
    if ((g > 0 && rng.bernoulli(cfg.internal_call_rate)) || self) {
      const std::size_t callee = self ? g : rng.uniform(g);
      auto& b = f.blocks[rng.uniform(f.blocks.size())];
      Call c;
      c.callee = std::string(kPlaceholder) + std::to_string(callee);
      c.external = false;
      const auto at = static_cast<std::ptrdiff_t>(rng.uniform(b.statements.size() + 1));
      b.statements.insert(b.statements.begin() + at, std::move(c));
    }
    bases.push_back(std::move(f));
  }
  Corpus corpus;
  for (std::size_t v = 0; v < cfg.variants; ++v) {
    Program p;
    p.name = "variant_" + std::to_string(v);
    for (std::size_t g = 0; g < cfg.groups; ++g) {
      IrFunction f = make_variant(bases[g], cfg.profile, hash_combine(hash_combine(cfg.seed, g), v + 1));
      f.name = variant_function_name(g, v);
      for (auto& b : f.blocks) {
        for (auto& s : b.statements) {
          if (auto* c = std::get_if<Call>(&s); c != nullptr && c->callee.starts_with(kPlaceholder)) {
            c->callee = variant_function_name(std::stoul(c->callee.substr(1)), v);
          }
        }
      }
      corpus.groups.emplace_back(f.name, group_name(g));
      p.functions.push_back(std::move(f));
    }
    corpus.programs.push_back(std::move(p));
  }
  return corpus;
}

std::string format_groups(const std::vector<std::pair<std::string, std::string>>& groups) {
  std::string out;
  for (const auto& [fn, g] : groups) out += fn + "\t" + g + "\n";
  return out;
}

std::map<std::string, std::string> parse_groups(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw std::runtime_error("groups line " + std::to_string(line_no) + ": expected name<TAB>group");
    }
    if (!out.emplace(line.substr(0, tab), line.substr(tab + 1)).second) {
      throw std::runtime_error("groups line " + std::to_string(line_no) + ": duplicate function '" +
                               line.substr(0, tab) + "'");
    }
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t v = 0; v < corpus.programs.size(); ++v) {
    save_program(corpus.programs[v], dir + "/variant_" + std::to_string(v) + ".vexir");
  }
  std::ofstream out(dir + "/groups.tsv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + dir + "/groups.tsv'");
  out << format_groups(corpus.groups);
}

}  // namespace peepvec
