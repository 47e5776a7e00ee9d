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

#include "peepvec/vexine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "peepvec/rng.hpp"
#include "peepvec/text.hpp"

namespace peepvec {

namespace {

constexpr std::array<std::string_view, 4> kLevelNames = {"N0", "N1", "N2", "N3"};

// Map keyed by tmp or register id. Ids below a bound proportional to the
// peephole length live in a flat table, larger ones in a hash map. clear() is
// constant time: flat slots are stamped with a generation.
template <class V>
class IdMap {
 public:
  explicit IdMap(std::size_t statements = 0) : limit_(std::max<std::size_t>(4096, 8 * statements)) {}

  const V* find(std::uint32_t id) const {
    if (id < limit_) {
      return id < dense_.size() && dense_[id].gen == gen_ ? &dense_[id].value : nullptr;
    }
    auto it = sparse_.find(id);
    return it == sparse_.end() ? nullptr : &it->second;
  }
  V* find(std::uint32_t id) { return const_cast<V*>(std::as_const(*this).find(id)); }
  bool contains(std::uint32_t id) const { return find(id) != nullptr; }

  // Inserts a value-initialized entry when id is absent.
  V& operator[](std::uint32_t id) {
    if (id >= limit_) return sparse_[id];
    if (id >= dense_.size()) dense_.resize(std::min(limit_, std::max<std::size_t>(id + 1, 2 * dense_.size())));
    Slot& slot = dense_[id];
    if (slot.gen != gen_) {
      slot.value = V{};
      slot.gen = gen_;
    }
    return slot.value;
  }

  // Returns whether id was absent, like std::set::insert.
  bool insert(std::uint32_t id) {
    const bool absent = !contains(id);
    (*this)[id];
    return absent;
  }

  void erase(std::uint32_t id) {
    if (id >= limit_) {
      sparse_.erase(id);
    } else if (id < dense_.size()) {
      dense_[id].gen = 0;
    }
  }

  void clear() {
    ++gen_;
    if (!sparse_.empty()) sparse_.clear();
  }

 private:
  struct Slot {
    std::uint32_t gen = 0;
    V value{};
  };
  std::size_t limit_;
  std::uint32_t gen_ = 1;
  std::vector<Slot> dense_;
  std::unordered_map<std::uint32_t, V> sparse_;
};

// Empties a hash container in time proportional to its size; clear() also
// walks every bucket, and the bucket array never shrinks.
template <class C>
void reset(C& c) {
  if (!c.empty()) c = C{};
}

// Counter per id, zero until set; flat below the same bound as IdMap. Kept
// at four bytes per id since the tables are probed at random.
class IdCounters {
 public:
  explicit IdCounters(std::size_t statements = 0) : limit_(std::max<std::size_t>(4096, 8 * statements)) {}

  std::uint32_t get(std::uint32_t id) const {
    if (id < limit_) return id < dense_.size() ? dense_[id] : 0;
    auto it = sparse_.find(id);
    return it == sparse_.end() ? 0 : it->second;
  }
  std::uint32_t& at(std::uint32_t id) {
    if (id >= limit_) return sparse_[id];
    if (id >= dense_.size()) dense_.resize(std::min(limit_, std::max<std::size_t>(id + 1, 2 * dense_.size())));
    return dense_[id];
  }

 private:
  std::size_t limit_;
  std::vector<std::uint32_t> dense_;
  std::unordered_map<std::uint32_t, std::uint32_t> sparse_;
};

class TmpVersions {
 public:
  explicit TmpVersions(std::size_t statements = 0) : v_(statements) {}
  std::uint32_t get(std::uint32_t t) const { return v_.get(t); }
  std::uint32_t bump(std::uint32_t t) { return ++v_.at(t); }

 private:
  IdCounters v_;
};

bool is_const(const Operand& o) {
  return std::holds_alternative<IntConst>(o) || std::holds_alternative<FloatConst>(o);
}

std::uint64_t const_bits(const Operand& o) {
  if (const auto* c = std::get_if<IntConst>(&o)) return static_cast<std::uint64_t>(c->value);
  return std::bit_cast<std::uint64_t>(std::get<FloatConst>(o).value);
}

Operand const_operand(std::uint64_t bits, IrType type) {
  const IrType cls = type_class(type);
  if (cls == IrType::Float || cls == IrType::Double) return FloatConst{std::bit_cast<double>(bits)};
  return IntConst{static_cast<int128>(bits), cls};
}

void compact(std::vector<Statement>& stmts, const std::vector<char>& removed) {
  std::size_t w = 0;
  for (std::size_t r = 0; r < stmts.size(); ++r) {
    if (!removed[r]) {
      if (w != r) stmts[w] = std::move(stmts[r]);
      ++w;
    }
  }
  stmts.resize(w);
}

// Tmp or register reads of a statement, in evaluation order.
template <class Fn>
void for_each_read(const Statement& s, const Fn& fn) {
  if (const auto* a = std::get_if<TmpAssign>(&s)) {
    if (const auto* g = std::get_if<GetReg>(&a->expr)) fn(UseKind::kReg, g->reg);
    if (const auto* g = std::get_if<GetRegI>(&a->expr)) fn(UseKind::kRegI, g->reg);
  }
  for_each_operand(s, [&](const Operand& o) {
    if (const auto* t = std::get_if<TmpRef>(&o)) fn(UseKind::kTmp, t->id);
    if (const auto* r = std::get_if<RegRef>(&o)) fn(UseKind::kReg, r->id);
  });
}

std::string versioned(const Operand& o, const TmpVersions& v) {
  if (const auto* t = std::get_if<TmpRef>(&o)) {
    return "t" + std::to_string(t->id) + "#" + std::to_string(v.get(t->id));
  }
  return format_operand(o);
}

// Incremental available-expression analysis shared by the public snapshot
// and the CSE pass.
class AvailTracker {
 public:
  // Tmp currently holding the value of a's expression, if available.
  std::optional<std::uint32_t> lookup(const TmpAssign& a) {
    auto k = key(a);
    if (!k) return std::nullopt;
    auto it = by_key_.find(*k);
    if (it == by_key_.end()) return std::nullopt;
    // Holders only ever become invalid, so dead ones are dropped for good.
    auto& holders = it->second;
    while (!holders.empty() && !valid(holders.front())) holders.pop_front();
    if (holders.empty()) return std::nullopt;
    return holders.front().tmp;
  }

  void step(const Statement& s) {
    std::visit(Overloaded{
                   [&](const TmpAssign& a) {
                     if (a.tmp == kAbstractId) return;
                     if (auto k = key(a)) {
                       {
                         Entry e;
                         e.shape = *expression_shape(a);
                         e.tmp = a.tmp;
                         e.ver = vers_.get(a.tmp) + 1;
                         for_each_operand(Statement(a), [&](const Operand& o) {
                           if (const auto* t = std::get_if<TmpRef>(&o)) {
                             e.deps.emplace_back(t->id, vers_.get(t->id));
                           }
                         });
                         e.epoch = epoch_for(a);
                         e.epoch_kind = epoch_kind(a);
                         e.reg = reg_of(a);
                         by_key_[*k].push_back(std::move(e));
                       }
                     }
                     vers_.bump(a.tmp);
                   },
                   [&](const PutReg& p) { ++reg_epoch_[p.reg]; },
                   [&](const PutRegI& p) { ++regi_epoch_[p.reg]; },
                   [&](const Store&) { ++mem_epoch_; },
                   [&](const Call& c) {
                     ++mem_epoch_;
                     ++call_epoch_;
                     if (c.result && c.result->tmp != kAbstractId) vers_.bump(c.result->tmp);
                   },
               },
               s);
  }

  std::vector<AvailableExpr> snapshot() const {
    std::vector<AvailableExpr> out;
    for (const auto& [k, holders] : by_key_) {
      for (const auto& e : holders) {
        if (valid(e)) {
          out.push_back({e.shape, e.tmp});
          break;
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const AvailableExpr& a, const AvailableExpr& b) {
      return a.shape != b.shape ? a.shape < b.shape : a.tmp < b.tmp;
    });
    return out;
  }

 private:
  enum class EpochKind : std::uint8_t { kNone, kMem, kReg, kRegI };

  struct Entry {
    std::string shape;
    std::uint32_t tmp = 0;
    std::uint32_t ver = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> deps;
    EpochKind epoch_kind = EpochKind::kNone;
    std::uint32_t reg = 0;
    std::uint64_t epoch = 0;
  };

  static EpochKind epoch_kind(const TmpAssign& a) {
    if (std::holds_alternative<Load>(a.expr)) return EpochKind::kMem;
    if (std::holds_alternative<GetReg>(a.expr)) return EpochKind::kReg;
    if (std::holds_alternative<GetRegI>(a.expr)) return EpochKind::kRegI;
    return EpochKind::kNone;
  }
  static std::uint32_t reg_of(const TmpAssign& a) {
    if (const auto* g = std::get_if<GetReg>(&a.expr)) return g->reg;
    if (const auto* g = std::get_if<GetRegI>(&a.expr)) return g->reg;
    return 0;
  }
  static std::uint64_t lookup_epoch(const IdMap<std::uint64_t>& m, std::uint32_t r) {
    const std::uint64_t* e = m.find(r);
    return e == nullptr ? 0 : *e;
  }
  std::uint64_t current_epoch(EpochKind kind, std::uint32_t reg) const {
    switch (kind) {
      case EpochKind::kMem: return mem_epoch_;
      case EpochKind::kReg: return (call_epoch_ << 32) ^ lookup_epoch(reg_epoch_, reg);
      case EpochKind::kRegI: return (call_epoch_ << 32) ^ lookup_epoch(regi_epoch_, reg);
      case EpochKind::kNone: return 0;
    }
    return 0;
  }
  std::uint64_t epoch_for(const TmpAssign& a) const {
    return current_epoch(epoch_kind(a), reg_of(a));
  }

  bool valid(const Entry& e) const {
    if (vers_.get(e.tmp) != e.ver) return false;
    for (const auto& [t, v] : e.deps) {
      if (vers_.get(t) != v) return false;
    }
    return current_epoch(e.epoch_kind, e.reg) == e.epoch;
  }

  std::optional<std::string> key(const TmpAssign& a) const {
    if (!expression_shape(a)) return std::nullopt;
    std::string k(type_name(a.type));
    std::visit(Overloaded{
                   [&](const GetReg& g) { k += " get(r" + std::to_string(g.reg) + ")"; },
                   [&](const GetRegI& g) { k += " geti(r" + std::to_string(g.reg) + ")"; },
                   [&](const Load& l) { k += " load(" + versioned(l.addr, vers_) + ")"; },
                   [&](const OpExpr& op) {
                     k += " " + op.opcode + "(";
                     for (const auto& o : op.args) k += versioned(o, vers_) + ",";
                     k += ")";
                   },
                   [&](const ConstExpr&) {},
               },
               a.expr);
    k += "@" + std::to_string(epoch_for(a));
    return k;
  }

  TmpVersions vers_;
  std::uint64_t mem_epoch_ = 0;
  std::uint64_t call_epoch_ = 0;
  IdMap<std::uint64_t> reg_epoch_;
  IdMap<std::uint64_t> regi_epoch_;
  std::unordered_map<std::string, std::deque<Entry>> by_key_;
};

// ---- passes -----------------------------------------------------------------

// A remembered operand; tmp operands stay usable while their version holds.
struct Held {
  Operand value;
  std::uint32_t ver = 0;
};

bool held_valid(const Held& h, const TmpVersions& v) {
  if (const auto* t = std::get_if<TmpRef>(&h.value)) return v.get(t->id) == h.ver;
  return is_const(h.value);
}

Held hold(const Operand& o, const TmpVersions& v) {
  Held h{o, 0};
  if (const auto* t = std::get_if<TmpRef>(&o)) h.ver = v.get(t->id);
  return h;
}

void bump_def(const Statement& s, TmpVersions& v) {
  if (auto t = defined_tmp(s); t && *t != kAbstractId) v.bump(*t);
}

// get(rK) reads the value last put to rK, or the value an earlier get(rK)
// produced, as long as that operand still holds it.
bool register_promotion(std::vector<Statement>& stmts) {
  bool changed = false;
  TmpVersions vers(stmts.size());
  IdMap<Held> regs(stmts.size());
  IdMap<Held> iregs(stmts.size());
  auto known = [&](IdMap<Held>& m, std::uint32_t r) -> const Operand* {
    const Held* h = m.find(r);
    if (h == nullptr || !held_valid(*h, vers)) return nullptr;
    return &h->value;
  };
  for (auto& s : stmts) {
    if (auto* a = std::get_if<TmpAssign>(&s); a != nullptr && a->tmp != kAbstractId) {
      IdMap<Held>* file = nullptr;
      std::uint32_t reg = 0;
      if (auto* g = std::get_if<GetReg>(&a->expr)) {
        file = &regs;
        reg = g->reg;
      } else if (auto* g = std::get_if<GetRegI>(&a->expr)) {
        file = &iregs;
        reg = g->reg;
      }
      if (file != nullptr && reg != kAbstractId) {
        if (const Operand* v = known(*file, reg)) {
          a->expr = ConstExpr{*v};
          changed = true;
          vers.bump(a->tmp);
        } else {
          const std::uint32_t ver = vers.bump(a->tmp);
          (*file)[reg] = Held{TmpRef{a->tmp}, ver};
        }
        continue;
      }
    }
    std::visit(Overloaded{
                   [&](const PutReg& p) {
                     if (p.reg != kAbstractId) regs[p.reg] = hold(p.value, vers);
                   },
                   [&](const PutRegI& p) {
                     if (p.reg != kAbstractId) iregs[p.reg] = hold(p.value, vers);
                   },
                   [&](const Call&) {
                     regs.clear();
                     iregs.clear();
                   },
                   [](const auto&) {},
               },
               s);
    bump_def(s, vers);
  }
  return changed;
}

// Drops a put when the same register is written again before any read.
bool redundant_write_elimination(std::vector<Statement>& stmts) {
  std::vector<char> removed(stmts.size(), 0);
  IdMap<char> overwritten(stmts.size());
  IdMap<char> overwritten_i(stmts.size());
  bool changed = false;
  for (std::size_t i = stmts.size(); i-- > 0;) {
    const Statement& s = stmts[i];
    if (const auto* p = std::get_if<PutReg>(&s); p != nullptr && p->reg != kAbstractId) {
      if (!overwritten.insert(p->reg)) {
        removed[i] = 1;
        changed = true;
        continue;
      }
    } else if (const auto* p = std::get_if<PutRegI>(&s); p != nullptr && p->reg != kAbstractId) {
      if (!overwritten_i.insert(p->reg)) {
        removed[i] = 1;
        changed = true;
        continue;
      }
    } else if (std::holds_alternative<Call>(s)) {
      overwritten.clear();
      overwritten_i.clear();
    }
    for_each_read(s, [&](UseKind k, std::uint32_t id) {
      if (k == UseKind::kReg) overwritten.erase(id);
      if (k == UseKind::kRegI) overwritten_i.erase(id);
    });
  }
  if (changed) compact(stmts, removed);
  return changed;
}

// Removes "t = operand" definitions whose tmp is not read afterwards.
bool remove_dead(std::vector<Statement>& stmts, bool copies_only) {
  std::vector<char> removed(stmts.size(), 0);
  IdCounters live(stmts.size());
  bool changed = false;
  for (std::size_t i = stmts.size(); i-- > 0;) {
    const Statement& s = stmts[i];
    if (const auto* a = std::get_if<TmpAssign>(&s); a != nullptr && a->tmp != kAbstractId) {
      const bool eligible = !copies_only || std::holds_alternative<ConstExpr>(a->expr);
      if (eligible && live.get(a->tmp) == 0) {
        removed[i] = 1;
        changed = true;
        continue;
      }
    }
    if (auto t = defined_tmp(s)) live.at(*t) = 0;
    for_each_read(s, [&](UseKind k, std::uint32_t id) {
      if (k == UseKind::kTmp) live.at(id) = 1;
    });
  }
  if (changed) compact(stmts, removed);
  return changed;
}

// Commutative binary operations keep a constant operand on the right.
bool constant_on_right(Statement& s, const OpcodeTable& table) {
  auto* a = std::get_if<TmpAssign>(&s);
  auto* op = a != nullptr ? std::get_if<OpExpr>(&a->expr) : nullptr;
  if (op == nullptr || op->args.size() != 2 || !is_const(op->args[0]) || is_const(op->args[1])) {
    return false;
  }
  const OpcodeEntry* entry = table.find(op->opcode);
  if (entry == nullptr || !entry->commutative) return false;
  std::swap(op->args[0], op->args[1]);
  return true;
}

// Uses of the target of "t = u" read u directly while u is unchanged, and uses
// of "t = constant" read the constant; dead copies are then dropped.
bool copy_propagation(std::vector<Statement>& stmts, const OpcodeTable& table) {
  bool changed = false;
  TmpVersions vers(stmts.size());
  struct Copy {
    Held src;
    std::uint32_t ver = 0;  // version of the copy target
  };
  IdMap<Copy> copies(stmts.size());
  std::vector<char> removed(stmts.size(), 0);
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    Statement& s = stmts[i];
    for_each_operand(s, [&](Operand& o) {
      const auto* t = std::get_if<TmpRef>(&o);
      if (t == nullptr) return;
      const Copy* copy = copies.find(t->id);
      if (copy == nullptr || copy->ver != vers.get(t->id) || !held_valid(copy->src, vers)) return;
      o = copy->src.value;
      changed = true;
    });
    changed |= constant_on_right(s, table);
    auto def = defined_tmp(s);
    if (!def || *def == kAbstractId) continue;
    const auto* a = std::get_if<TmpAssign>(&s);
    const ConstExpr* c = a != nullptr ? std::get_if<ConstExpr>(&a->expr) : nullptr;
    const TmpRef* src = c != nullptr ? std::get_if<TmpRef>(&c->value) : nullptr;
    if (src != nullptr && src->id == *def) {
      // "t = t" leaves every location unchanged.
      removed[i] = 1;
      changed = true;
      continue;
    }
    const std::uint32_t ver = vers.bump(*def);
    if (src != nullptr || (c != nullptr && is_const(c->value))) {
      copies[*def] = Copy{hold(c->value, vers), ver};
    } else {
      copies.erase(*def);
    }
  }
  compact(stmts, removed);
  changed |= remove_dead(stmts, /*copies_only=*/true);
  return changed;
}

// Tmps defined as constants are replaced by the constant at their uses, and
// operations over constants are evaluated.
bool constant_folding(std::vector<Statement>& stmts, const OpcodeTable& table) {
  bool changed = false;
  IdMap<Operand> consts(stmts.size());
  for (auto& s : stmts) {
    for_each_operand(s, [&](Operand& o) {
      const auto* t = std::get_if<TmpRef>(&o);
      if (t == nullptr) return;
      const Operand* c = consts.find(t->id);
      if (c == nullptr) return;
      o = *c;
      changed = true;
    });
    auto def = defined_tmp(s);
    if (!def || *def == kAbstractId) continue;
    auto* a = std::get_if<TmpAssign>(&s);
    if (a == nullptr) {
      consts.erase(*def);
      continue;
    }
    if (auto* op = std::get_if<OpExpr>(&a->expr)) {
      const OpcodeEntry* entry = table.find(op->opcode);
      changed |= constant_on_right(s, table);
      const bool all_const = std::all_of(op->args.begin(), op->args.end(), is_const);
      if (entry != nullptr && all_const) {
        std::vector<OpValue> args;
        args.reserve(op->args.size());
        for (const auto& o : op->args) args.push_back({const_bits(o), false});
        if (can_fold(*entry, args)) {
          const OpValue v = eval_op(entry->canonical, args);
          a->expr = ConstExpr{const_operand(v.bits, a->type)};
          changed = true;
        }
      }
    }
    const auto* c = std::get_if<ConstExpr>(&a->expr);
    if (c != nullptr && is_const(c->value)) {
      consts[*def] = c->value;
    } else {
      consts.erase(*def);
    }
  }
  return changed;
}

bool common_subexpression_elimination(std::vector<Statement>& stmts) {
  bool changed = false;
  AvailTracker avail;
  for (auto& s : stmts) {
    if (auto* a = std::get_if<TmpAssign>(&s); a != nullptr && a->tmp != kAbstractId) {
      if (auto hit = avail.lookup(*a)) {
        a->expr = ConstExpr{TmpRef{*hit}};
        changed = true;
      }
    }
    avail.step(s);
  }
  return changed;
}

// Memory cell identity inside a peephole: M<n>, a constant address, or a tmp
// value (identified by version).
struct CellKey {
  std::uint8_t kind = 0;  // 0 symbolic, 1 constant, 2 tmp
  std::uint64_t id = 0;
  std::uint32_t ver = 0;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};
struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(hash_combine(hash_combine(k.kind, k.id), k.ver));
  }
};

std::optional<CellKey> cell_key(const Operand& addr, const TmpVersions& v) {
  if (const auto* m = std::get_if<MemRef>(&addr)) return CellKey{0, m->id, 0};
  if (is_const(addr)) return CellKey{1, const_bits(addr), 0};
  if (const auto* t = std::get_if<TmpRef>(&addr)) return CellKey{2, t->id, v.get(t->id)};
  return std::nullopt;
}

// "t = load(M); ...; store(M) = t" drops the store when neither t nor M
// changed in between. Stores through non-symbolic addresses and calls forget
// everything.
bool load_store_elimination(std::vector<Statement>& stmts) {
  bool changed = false;
  TmpVersions vers(stmts.size());
  // Symbolic cells (M<n>) and cells named through values are kept apart so a
  // symbolic store forgets the latter without scanning the former.
  IdMap<Held> symbolic(stmts.size());
  std::unordered_map<CellKey, Held, CellKeyHash> valued;
  auto find = [&](const CellKey& k) -> const Held* {
    if (k.kind == 0) return symbolic.find(static_cast<std::uint32_t>(k.id));
    auto it = valued.find(k);
    return it == valued.end() ? nullptr : &it->second;
  };
  auto remember = [&](const CellKey& k, Held h) {
    if (k.kind == 0) {
      symbolic[static_cast<std::uint32_t>(k.id)] = std::move(h);
    } else {
      valued[k] = std::move(h);
    }
  };
  std::vector<char> removed(stmts.size(), 0);
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const Statement& s = stmts[i];
    if (const auto* st = std::get_if<Store>(&s)) {
      auto key = cell_key(st->addr, vers);
      if (key) {
        const Held* h = find(*key);
        if (h != nullptr && held_valid(*h, vers) && h->value == st->value) {
          removed[i] = 1;
          changed = true;
          continue;
        }
      }
      if (!key || key->kind != 0) symbolic.clear();
      // A store to M<n> may still alias cells named through values.
      reset(valued);
      if (key) remember(*key, hold(st->value, vers));
      continue;
    }
    if (std::holds_alternative<Call>(s)) {
      symbolic.clear();
      reset(valued);
    }
    const auto* a = std::get_if<TmpAssign>(&s);
    const Load* ld = a != nullptr ? std::get_if<Load>(&a->expr) : nullptr;
    // The address is read before the loaded tmp is (re)defined.
    std::optional<CellKey> key = ld != nullptr ? cell_key(ld->addr, vers) : std::nullopt;
    bump_def(s, vers);
    if (key && a->tmp != kAbstractId) remember(*key, hold(TmpRef{a->tmp}, vers));
  }
  if (changed) compact(stmts, removed);
  return changed;
}


// Of two stores to the same cell with no load or call in between, the first
// is dropped.
bool store_store_elimination(std::vector<Statement>& stmts) {
  std::vector<char> removed(stmts.size(), 0);
  bool changed = false;
  // Cells overwritten later with no intervening read. Tmp-addressed cells are
  // keyed by tmp id and dropped when the scan passes that tmp's definition.
  std::unordered_set<CellKey, CellKeyHash> pending;
  for (std::size_t i = stmts.size(); i-- > 0;) {
    const Statement& s = stmts[i];
    if (auto t = defined_tmp(s)) pending.erase(CellKey{2, *t, 0});
    if (const auto* st = std::get_if<Store>(&s)) {
      std::optional<CellKey> key;
      if (const auto* m = std::get_if<MemRef>(&st->addr)) {
        key = CellKey{0, m->id, 0};
      } else if (is_const(st->addr)) {
        key = CellKey{1, const_bits(st->addr), 0};
      } else if (const auto* t = std::get_if<TmpRef>(&st->addr)) {
        key = CellKey{2, t->id, 0};
      }
      if (key && !pending.insert(*key).second) {
        removed[i] = 1;
        changed = true;
      }
      continue;
    }
    const auto* a = std::get_if<TmpAssign>(&s);
    if (std::holds_alternative<Call>(s) || (a != nullptr && std::holds_alternative<Load>(a->expr))) {
      reset(pending);
    }
  }
  if (changed) compact(stmts, removed);
  return changed;
}

constexpr std::array kN1 = {Pass::kRegisterPromotion, Pass::kRedundantWrite,
                            Pass::kCopyPropagation};
constexpr std::array kN2 = {Pass::kRegisterPromotion, Pass::kRedundantWrite,
                            Pass::kCopyPropagation,   Pass::kConstantFolding, Pass::kCse};
constexpr std::array kN3 = {Pass::kRegisterPromotion, Pass::kRedundantWrite,
                            Pass::kCopyPropagation,   Pass::kConstantFolding,
                            Pass::kCse,               Pass::kLoadStore,
                            Pass::kStoreStore,        Pass::kDeadTemp};

}  // namespace

std::optional<NormLevel> parse_norm_level(std::string_view s) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (kLevelNames[i] == s) return static_cast<NormLevel>(i);
  }
  return std::nullopt;
}

std::string_view norm_level_name(NormLevel level) {
  return kLevelNames[static_cast<std::size_t>(level)];
}

std::vector<UseSite> reaching_defs(std::span<const Statement> stmts) {
  std::vector<UseSite> out;
  std::unordered_map<std::uint32_t, std::size_t> tdef, rdef, idef;
  auto find = [](const std::unordered_map<std::uint32_t, std::size_t>& m, std::uint32_t id) {
    auto it = m.find(id);
    return it == m.end() ? kParam : it->second;
  };
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const Statement& s = stmts[i];
    for_each_read(s, [&](UseKind k, std::uint32_t id) {
      const auto& m = k == UseKind::kTmp ? tdef : (k == UseKind::kReg ? rdef : idef);
      out.push_back({i, k, id, find(m, id)});
    });
    if (auto t = defined_tmp(s)) tdef[*t] = i;
    if (const auto* p = std::get_if<PutReg>(&s)) rdef[p->reg] = i;
    if (const auto* p = std::get_if<PutRegI>(&s)) idef[p->reg] = i;
  }
  return out;
}

std::optional<std::string> expression_shape(const TmpAssign& a) {
  // Register operands are read implicitly; such expressions are not tracked.
  bool reads_reg = false;
  for_each_operand(Statement(a), [&](const Operand& o) {
    reads_reg |= std::holds_alternative<RegRef>(o);
  });
  if (reads_reg) return std::nullopt;
  std::string head(type_name(a.type));
  return std::visit(
      Overloaded{
          [&](const GetReg& g) -> std::optional<std::string> {
            return head + " get(r" + std::to_string(g.reg) + ")";
          },
          [&](const GetRegI& g) -> std::optional<std::string> {
            return head + " geti(r" + std::to_string(g.reg) + ")";
          },
          [&](const Load& l) -> std::optional<std::string> {
            return head + " load(" + format_operand(l.addr) + ")";
          },
          [&](const OpExpr& op) -> std::optional<std::string> {
            if (op.opcode == kUnknownOpcode) return std::nullopt;
            return head + " " + format_expression(op);
          },
          [](const ConstExpr&) -> std::optional<std::string> { return std::nullopt; },
      },
      a.expr);
}

std::vector<std::vector<AvailableExpr>> available_exprs(std::span<const Statement> stmts) {
  std::vector<std::vector<AvailableExpr>> out;
  out.reserve(stmts.size());
  AvailTracker avail;
  for (const auto& s : stmts) {
    out.push_back(avail.snapshot());
    avail.step(s);
  }
  return out;
}

std::string_view pass_name(Pass p) {
  switch (p) {
    case Pass::kRegisterPromotion: return "register-promotion";
    case Pass::kRedundantWrite: return "redundant-write";
    case Pass::kCopyPropagation: return "copy-propagation";
    case Pass::kConstantFolding: return "constant-folding";
    case Pass::kCse: return "cse";
    case Pass::kLoadStore: return "load-store";
    case Pass::kStoreStore: return "store-store";
    case Pass::kDeadTemp: return "dead-temp";
  }
  return "unknown";
}

std::span<const Pass> passes_for(NormLevel level) {
  switch (level) {
    case NormLevel::N0: return {};
    case NormLevel::N1: return kN1;
    case NormLevel::N2: return kN2;
    case NormLevel::N3: return kN3;
  }
  return {};
}

bool run_pass(Pass p, std::vector<Statement>& stmts, const OpcodeTable& table) {
  switch (p) {
    case Pass::kRegisterPromotion: return register_promotion(stmts);
    case Pass::kRedundantWrite: return redundant_write_elimination(stmts);
    case Pass::kCopyPropagation: return copy_propagation(stmts, table);
    case Pass::kConstantFolding: return constant_folding(stmts, table);
    case Pass::kCse: return common_subexpression_elimination(stmts);
    case Pass::kLoadStore: return load_store_elimination(stmts);
    case Pass::kStoreStore: return store_store_elimination(stmts);
    case Pass::kDeadTemp: return remove_dead(stmts, /*copies_only=*/false);
  }
  return false;
}

std::vector<Statement> normalize_statements(std::vector<Statement> stmts, NormLevel level,
                                            const OpcodeTable& table, int* rounds) {
  int r = 0;
  const auto passes = passes_for(level);
  while (!passes.empty() && r < kMaxNormRounds) {
    ++r;
    bool changed = false;
    for (Pass p : passes) changed |= run_pass(p, stmts, table);
    if (!changed) break;
  }
  if (rounds != nullptr) *rounds = r;
  return stmts;
}

Peephole normalize_peephole(const Peephole& p, NormLevel level, const OpcodeTable& table) {
  return Peephole{p.block_ids, normalize_statements(p.statements, level, table)};
}

// ---- interpreter ------------------------------------------------------------

Environment seeded_environment(std::uint64_t seed) {
  return [seed](LocKind kind, std::uint64_t id) {
    return hash_combine(hash_combine(seed, static_cast<std::uint64_t>(kind)), id);
  };
}

namespace {

class Interpreter {
 public:
  Interpreter(const Environment& env, const OpcodeTable& table) : env_(env), table_(table) {}

  MachineState run(std::span<const Statement> stmts) {
    for (const auto& s : stmts) exec(s);
    return std::move(st_);
  }

 private:
  static OpValue lookup(const std::map<std::uint32_t, OpValue>& m, std::uint32_t id,
                        const Environment& env, LocKind kind) {
    auto it = m.find(id);
    return it != m.end() ? it->second : OpValue{env(kind, id), false};
  }

  OpValue value(const Operand& o) const {
    return std::visit(
        Overloaded{
            [&](const TmpRef& t) { return lookup(st_.tmps, t.id, env_, LocKind::kTmp); },
            [&](const RegRef& r) { return lookup(st_.registers, r.id, env_, LocKind::kReg); },
            [](const IntConst& c) { return OpValue{static_cast<std::uint64_t>(c.value), false}; },
            [](const FloatConst& c) { return OpValue{std::bit_cast<std::uint64_t>(c.value), false}; },
            // M<n> used as a value: a fixed symbolic address.
            [](const MemRef& m) { return OpValue{hash_combine(0x4D454D, m.id), false}; },
            [](const Abstract&) -> OpValue {
              throw std::invalid_argument("cannot evaluate abstract operand");
            },
        },
        o);
  }

  std::optional<MemKey> address(const Operand& o) const {
    if (const auto* m = std::get_if<MemRef>(&o)) return MemKey{true, m->id};
    const OpValue v = value(o);
    if (v.opaque) return std::nullopt;
    return MemKey{false, v.bits};
  }

  OpValue read_mem(const Operand& addr) const {
    auto key = address(addr);
    if (!key) return {0, true};
    auto it = st_.memory.find(*key);
    if (it != st_.memory.end()) return it->second;
    return {env_(key->symbolic ? LocKind::kMem : LocKind::kAddr, key->addr), false};
  }

  OpValue eval(const Expression& e) const {
    return std::visit(
        Overloaded{
            [&](const GetReg& g) { return lookup(st_.registers, g.reg, env_, LocKind::kReg); },
            [&](const GetRegI& g) { return lookup(st_.indexed, g.reg, env_, LocKind::kRegI); },
            [&](const Load& l) { return read_mem(l.addr); },
            [&](const ConstExpr& c) { return value(c.value); },
            [&](const OpExpr& op) {
              std::vector<OpValue> args;
              args.reserve(op.args.size());
              for (const auto& a : op.args) args.push_back(value(a));
              const OpcodeEntry* entry = table_.find(op.opcode);
              if (entry == nullptr) return OpValue{0, true};
              return eval_op(entry->canonical, args);
            },
        },
        e);
  }

  void exec(const Statement& s) {
    std::visit(Overloaded{
                   [&](const TmpAssign& a) { st_.tmps[a.tmp] = eval(a.expr); },
                   [&](const PutReg& p) { st_.registers[p.reg] = value(p.value); },
                   [&](const PutRegI& p) { st_.indexed[p.reg] = value(p.value); },
                   [&](const Store& w) {
                     const OpValue v = value(w.value);
                     if (auto key = address(w.addr)) {
                       st_.memory[*key] = v;
                     } else {
                       poisoned_store_ = true;
                     }
                   },
                   [&](const Call& c) {
                     std::uint64_t h = fnv1a64(c.callee);
                     bool opaque = false;
                     for (const auto& a : c.args) {
                       const OpValue v = value(a);
                       opaque |= v.opaque;
                       h = hash_combine(h, v.bits);
                     }
                     if (c.result) st_.tmps[c.result->tmp] = OpValue{h, opaque};
                   },
               },
               s);
    // A store through an opaque address could have hit any cell.
    if (poisoned_store_) {
      st_.memory[MemKey{false, 0}] = OpValue{0, true};
      poisoned_store_ = false;
    }
  }

  const Environment& env_;
  const OpcodeTable& table_;
  MachineState st_;
  bool poisoned_store_ = false;
};

template <class K>
bool maps_equal(const std::map<K, OpValue>& a, const std::map<K, OpValue>& b,
                const std::function<OpValue(const K&)>& initial) {
  auto check = [&](const std::map<K, OpValue>& x, const std::map<K, OpValue>& y) {
    for (const auto& [k, v] : x) {
      auto it = y.find(k);
      const OpValue other = it != y.end() ? it->second : initial(k);
      if (v.opaque || other.opaque || v.bits != other.bits) return false;
    }
    return true;
  };
  return check(a, b) && check(b, a);
}

}  // namespace

MachineState evaluate_peephole(std::span<const Statement> stmts, const Environment& env,
                               const OpcodeTable& table) {
  return Interpreter(env, table).run(stmts);
}

MachineState evaluate_peephole(const Peephole& p, std::uint64_t env_seed,
                               const OpcodeTable& table) {
  return evaluate_peephole(p.statements, seeded_environment(env_seed), table);
}

bool observables_equal(const MachineState& a, const MachineState& b, const Environment& env) {
  return maps_equal<std::uint32_t>(
             a.registers, b.registers,
             [&](const std::uint32_t& r) { return OpValue{env(LocKind::kReg, r), false}; }) &&
         maps_equal<std::uint32_t>(
             a.indexed, b.indexed,
             [&](const std::uint32_t& r) { return OpValue{env(LocKind::kRegI, r), false}; }) &&
         maps_equal<MemKey>(a.memory, b.memory, [&](const MemKey& k) {
           return OpValue{env(k.symbolic ? LocKind::kMem : LocKind::kAddr, k.addr), false};
         });
}

}  // namespace peepvec
