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

#include "peepvec/vocab.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace peepvec {

namespace {

constexpr std::array<std::string_view, kRelationCount> kRelationNames = {
    "TYPE", "NEXT", "ARG1", "ARG2", "ARG3", "ARG4", "ARG5", "ARG6", "ARG7", "ARG8"};

IrType operand_type(const Operand& o, const std::unordered_map<std::uint32_t, IrType>& tmp_types) {
  if (const auto* c = std::get_if<IntConst>(&o)) return type_class(c->type);
  if (std::holds_alternative<FloatConst>(o)) return IrType::Double;
  if (const auto* t = std::get_if<TmpRef>(&o)) {
    auto it = tmp_types.find(t->id);
    if (it != tmp_types.end()) return it->second;
  }
  return IrType::Int;
}

std::string opcode_entity(const std::string& opcode, const OpcodeTable& table) {
  if (opcode == kCastOpcode) return "mov";
  const OpcodeEntry* e = table.find(opcode);
  if (e == nullptr || e->canonical == kCastOpcode) return std::string(kUnknownOpcode);
  return e->canonical;
}

void append_number(std::string& out, double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

}  // namespace

std::string_view relation_name(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> parse_relation(std::string_view s) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == s) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

Relation arg_relation(std::size_t index) {
  if (index >= kMaxArgRelations) throw std::out_of_range("argument relation index");
  return static_cast<Relation>(static_cast<std::size_t>(Relation::kArg1) + index);
}

std::vector<std::string> entity_inventory(const OpcodeTable& table) {
  std::set<std::string> names;
  for (auto& op : table.canonical_opcodes()) names.insert(op);
  for (auto op : kDataMovementOpcodes) names.emplace(op);
  names.emplace(kUnknownOpcode);
  for (IrType t : {IrType::Int, IrType::Float, IrType::Double, IrType::Vector}) names.emplace(type_name(t));
  for (AbstractToken t : {AbstractToken::Var, AbstractToken::Const, AbstractToken::Reg, AbstractToken::Mem,
                          AbstractToken::Func}) {
    names.emplace(token_name(t));
  }
  return {names.begin(), names.end()};
}

AbstractToken abstract_token(const Operand& o) {
  return std::visit(Overloaded{
                        [](const TmpRef&) { return AbstractToken::Var; },
                        [](const IntConst&) { return AbstractToken::Const; },
                        [](const FloatConst&) { return AbstractToken::Const; },
                        [](const RegRef&) { return AbstractToken::Reg; },
                        [](const MemRef&) { return AbstractToken::Mem; },
                        [](const Abstract& a) { return a.token; },
                    },
                    o);
}

std::vector<InstructionEntities> decompose(std::span<const Statement> stmts, const OpcodeTable& table) {
  std::vector<InstructionEntities> out;
  out.reserve(stmts.size());
  std::unordered_map<std::uint32_t, IrType> tmp_types;
  auto tokens = [](const std::vector<Operand>& ops) {
    std::vector<AbstractToken> t;
    t.reserve(ops.size());
    for (const auto& o : ops) t.push_back(abstract_token(o));
    return t;
  };
  for (const auto& s : stmts) {
    InstructionEntities ie;
    std::visit(Overloaded{
                   [&](const TmpAssign& a) {
                     ie.type = type_class(a.type);
                     std::visit(Overloaded{
                                    [&](const GetReg&) {
                                      ie.opcode = "get";
                                      ie.args = {AbstractToken::Reg};
                                    },
                                    [&](const GetRegI&) {
                                      ie.opcode = "geti";
                                      ie.args = {AbstractToken::Reg};
                                    },
                                    [&](const Load& l) {
                                      ie.opcode = "load";
                                      ie.args = {abstract_token(l.addr)};
                                    },
                                    [&](const OpExpr& op) {
                                      ie.opcode = opcode_entity(op.opcode, table);
                                      ie.args = tokens(op.args);
                                    },
                                    [&](const ConstExpr& c) {
                                      ie.opcode = "mov";
                                      ie.args = {abstract_token(c.value)};
                                    },
                                },
                                a.expr);
                   },
                   [&](const PutReg& p) {
                     ie.opcode = "put";
                     ie.type = operand_type(p.value, tmp_types);
                     ie.args = {AbstractToken::Reg, abstract_token(p.value)};
                   },
                   [&](const PutRegI& p) {
                     ie.opcode = "puti";
                     ie.type = operand_type(p.value, tmp_types);
                     ie.args = {AbstractToken::Reg, abstract_token(p.value)};
                   },
                   [&](const Store& st) {
                     ie.opcode = "store";
                     ie.type = operand_type(st.value, tmp_types);
                     ie.args = {abstract_token(st.addr), abstract_token(st.value)};
                   },
                   [&](const Call& c) {
                     ie.opcode = "call";
                     if (c.result) ie.type = type_class(c.result->type);
                     ie.args = {AbstractToken::Func};
                     for (const auto& a : c.args) ie.args.push_back(abstract_token(a));
                   },
               },
               s);
    if (auto def = defined_tmp(s); def && *def != kAbstractId) tmp_types[*def] = *ie.type;
    out.push_back(std::move(ie));
  }
  return out;
}

std::vector<Triplet> extract_triplets(std::span<const Statement> stmts, const OpcodeTable& table) {
  const auto insts = decompose(stmts, table);
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto& ie = insts[i];
    if (ie.type) out.push_back({ie.opcode, Relation::kType, std::string(type_name(*ie.type))});
    const std::size_t n = std::min(ie.args.size(), kMaxArgRelations);
    for (std::size_t a = 0; a < n; ++a) {
      out.push_back({ie.opcode, arg_relation(a), std::string(token_name(ie.args[a]))});
    }
    if (i + 1 < insts.size()) out.push_back({ie.opcode, Relation::kNext, insts[i + 1].opcode});
  }
  return out;
}

std::vector<Triplet> extract_triplets(const Peephole& p, const OpcodeTable& table) {
  return extract_triplets(p.statements, table);
}

std::string format_triplet(const Triplet& t) {
  std::string out = t.head;
  out += '\t';
  out += relation_name(t.relation);
  out += '\t';
  out += t.tail;
  return out;
}

std::vector<Triplet> parse_triplets(std::string_view text) {
  std::vector<Triplet> out;
  std::size_t lineno = 0;
  for (std::size_t p = 0; p < text.size();) {
    const std::size_t q = std::min(text.find('\n', p), text.size());
    std::string_view line = text.substr(p, q - p);
    p = q + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos || t1 == 0 ||
        t2 + 1 == line.size()) {
      throw std::runtime_error("triplet line " + std::to_string(lineno) + ": expected head<TAB>REL<TAB>tail");
    }
    const auto rel = parse_relation(line.substr(t1 + 1, t2 - t1 - 1));
    if (!rel) {
      throw std::runtime_error("triplet line " + std::to_string(lineno) + ": unknown relation '" +
                               std::string(line.substr(t1 + 1, t2 - t1 - 1)) + "'");
    }
    out.push_back({std::string(line.substr(0, t1)), *rel, std::string(line.substr(t2 + 1))});
  }
  return out;
}

// ---- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::size_t dim, std::vector<std::string> entity_names)
    : dim_(dim), names_(std::move(entity_names)) {
  if (dim_ == 0) throw std::invalid_argument("vocabulary dimension must be positive");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw std::invalid_argument("duplicate entity name: " + names_[i]);
    }
  }
  entities_.assign(names_.size() * dim_, 0.0);
  relations_.assign(kRelationCount * dim_, 0.0);
}

std::optional<std::size_t> Vocabulary::find_entity(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> Vocabulary::entity(std::string_view name) const {
  auto i = find_entity(name);
  if (!i) throw std::out_of_range("unknown entity: " + std::string(name));
  return entity(*i);
}

std::span<const double> Vocabulary::entity(std::size_t index) const {
  return {entities_.data() + index * dim_, dim_};
}

std::span<double> Vocabulary::entity(std::size_t index) { return {entities_.data() + index * dim_, dim_}; }

std::span<const double> Vocabulary::relation(Relation r) const {
  return {relations_.data() + static_cast<std::size_t>(r) * dim_, dim_};
}

std::span<double> Vocabulary::relation(Relation r) {
  return {relations_.data() + static_cast<std::size_t>(r) * dim_, dim_};
}

bool operator==(const Vocabulary& a, const Vocabulary& b) {
  return a.dim_ == b.dim_ && a.names_ == b.names_ && a.entities_ == b.entities_ &&
         a.relations_ == b.relations_ && a.meta == b.meta;
}

// ---- TransE ----------------------------------------------------------------

double transe_energy(const Vocabulary& v, const IndexedTriplet& t) {
  const auto h = v.entity(t.head);
  const auto r = v.relation(static_cast<Relation>(t.relation));
  const auto tl = v.entity(t.tail);
  double e = 0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    const double d = h[i] + r[i] - tl[i];
    e += d * d;
  }
  return e;
}

double transe_loss(const Vocabulary& v, std::span<const IndexedTriplet> positives,
                   std::span<const IndexedTriplet> negatives, double margin, Vocabulary* grad) {
  if (positives.size() != negatives.size()) throw std::invalid_argument("positive/negative count mismatch");
  if (positives.empty()) return 0.0;
  const std::size_t dim = v.dim();
  if (grad != nullptr) {
    if (grad->dim() != dim || grad->entity_count() != v.entity_count()) {
      *grad = Vocabulary(dim, v.entity_names());
    }
    grad->entity_data().assign(v.entity_data().size(), 0.0);
    grad->relation_data().assign(v.relation_data().size(), 0.0);
  }
  const double scale = 1.0 / static_cast<double>(positives.size());
  double loss = 0;
  for (std::size_t b = 0; b < positives.size(); ++b) {
    const double term = margin + transe_energy(v, positives[b]) - transe_energy(v, negatives[b]);
    if (term <= 0) continue;
    loss += term;
    if (grad == nullptr) continue;
    // d/dh ||h + r - t||^2 = 2(h + r - t) = d/dr = -d/dt.
    auto accumulate = [&](const IndexedTriplet& t, double sign) {
      const auto h = v.entity(t.head);
      const auto r = v.relation(static_cast<Relation>(t.relation));
      const auto tl = v.entity(t.tail);
      auto gh = grad->entity(t.head);
      auto gr = grad->relation(static_cast<Relation>(t.relation));
      auto gt = grad->entity(t.tail);
      for (std::size_t i = 0; i < dim; ++i) {
        const double g = sign * scale * 2.0 * (h[i] + r[i] - tl[i]);
        gh[i] += g;
        gr[i] += g;
        gt[i] -= g;
      }
    };
    accumulate(positives[b], 1.0);
    accumulate(negatives[b], -1.0);
  }
  return loss * scale;
}

namespace {

class Adam {
 public:
  Adam(std::size_t n, double lr) : m_(n, 0.0), v_(n, 0.0), lr_(lr) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, std::size_t t) {
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<double> m_, v_;
  double lr_;
};

void normalize_rows(std::vector<double>& data, std::size_t dim) {
  for (std::size_t off = 0; off < data.size(); off += dim) {
    double n = 0;
    for (std::size_t i = 0; i < dim; ++i) n += data[off + i] * data[off + i];
    n = std::sqrt(n);
    if (n == 0) continue;
    for (std::size_t i = 0; i < dim; ++i) data[off + i] /= n;
  }
}

}  // namespace

TransEResult train_transe(std::span<const Triplet> triplets, const TransEConfig& cfg,
                          std::span<const std::string> entities) {
  if (triplets.empty()) throw std::invalid_argument("empty triplet stream");
  if (!(cfg.margin > 0) || !(cfg.learning_rate > 0)) {
    throw std::invalid_argument("margin and learning rate must be positive");
  }
  if (cfg.batch_size == 0 || cfg.dim == 0) throw std::invalid_argument("batch size and dim must be positive");

  std::vector<Triplet> distinct(triplets.begin(), triplets.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::set<std::string> names(entities.begin(), entities.end());
  for (const auto& t : distinct) {
    names.insert(t.head);
    names.insert(t.tail);
  }
  TransEResult result;
  result.distinct_triplets = distinct.size();
  Vocabulary& v = result.vocab;
  v = Vocabulary(cfg.dim, {names.begin(), names.end()});

  Rng rng(cfg.seed);
  Rng init = rng.split("init");
  const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
  for (double& x : v.relation_data()) x = init.uniform(-bound, bound);
  for (double& x : v.entity_data()) x = init.uniform(-bound, bound);
  normalize_rows(v.relation_data(), cfg.dim);
  normalize_rows(v.entity_data(), cfg.dim);

  std::vector<IndexedTriplet> indexed;
  indexed.reserve(distinct.size());
  for (const auto& t : distinct) {
    indexed.push_back({static_cast<std::uint32_t>(*v.find_entity(t.head)),
                       static_cast<std::uint32_t>(t.relation),
                       static_cast<std::uint32_t>(*v.find_entity(t.tail))});
  }

  const std::size_t n_ent = v.entity_count();
  Adam adam_e(v.entity_data().size(), cfg.learning_rate);
  Adam adam_r(v.relation_data().size(), cfg.learning_rate);
  Vocabulary grad(cfg.dim, v.entity_names());
  std::vector<std::size_t> order(indexed.size());
  std::vector<IndexedTriplet> pos, neg;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = rng.split(epoch);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    erng.shuffle(order.begin(), order.end());
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      pos.clear();
      neg.clear();
      for (std::size_t i = start; i < end; ++i) {
        const IndexedTriplet& t = indexed[order[i]];
        IndexedTriplet c = t;
        const bool corrupt_head = erng.bernoulli(0.5);
        std::uint32_t& slot = corrupt_head ? c.head : c.tail;
        const std::uint32_t original = slot;
        if (n_ent > 1) {
          do {
            slot = static_cast<std::uint32_t>(erng.uniform(n_ent));
          } while (slot == original);
        }
        pos.push_back(t);
        neg.push_back(c);
      }
      const double l = transe_loss(v, pos, neg, cfg.margin, &grad);
      epoch_loss += l * static_cast<double>(pos.size());
      ++step;
      adam_e.step(v.entity_data(), grad.entity_data(), step);
      adam_r.step(v.relation_data(), grad.relation_data(), step);
      normalize_rows(v.entity_data(), cfg.dim);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(indexed.size()));
  }

  v.meta["model"] = "transe";
  v.meta["margin"] = std::to_string(cfg.margin);
  v.meta["learning_rate"] = std::to_string(cfg.learning_rate);
  v.meta["batch_size"] = std::to_string(cfg.batch_size);
  v.meta["epochs"] = std::to_string(cfg.epochs);
  v.meta["seed"] = std::to_string(cfg.seed);
  v.meta["triplets"] = std::to_string(distinct.size());
  return result;
}

double hits_at(const Vocabulary& v, std::span<const Triplet> triplets, std::size_t k) {
  if (triplets.empty()) return 0.0;
  std::size_t hits = 0;
  std::vector<double> target(v.dim());
  for (const auto& t : triplets) {
    const auto h = v.entity(t.head);
    const auto r = v.relation(t.relation);
    for (std::size_t i = 0; i < v.dim(); ++i) target[i] = h[i] + r[i];
    auto dist = [&](std::size_t e) {
      const auto x = v.entity(e);
      double d = 0;
      for (std::size_t i = 0; i < v.dim(); ++i) d += (target[i] - x[i]) * (target[i] - x[i]);
      return d;
    };
    const std::size_t truth = *v.find_entity(t.tail);
    const double dt = dist(truth);
    std::size_t better = 0;
    for (std::size_t e = 0; e < v.entity_count(); ++e) {
      if (e != truth && dist(e) <= dt) ++better;
    }
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(triplets.size());
}

// ---- analogies -------------------------------------------------------------

std::vector<AnalogyQuery> parse_analogies(std::string_view text) {
  std::vector<AnalogyQuery> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string w; ls >> w;) f.push_back(w);
    if (f.empty()) continue;
    if (f.size() != 4) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 'a b c expected'");
    }
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

std::string answer_analogy(const Vocabulary& v, std::string_view a, std::string_view b, std::string_view c) {
  const auto va = v.entity(a);
  const auto vb = v.entity(b);
  const auto vc = v.entity(c);
  std::vector<double> target(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) target[i] = vb[i] - va[i] + vc[i];
  const std::string* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < v.entity_count(); ++e) {
    const std::string& name = v.entity_names()[e];
    if (name == a || name == b || name == c) continue;
    const auto x = v.entity(e);
    double d = 0;
    for (std::size_t i = 0; i < v.dim(); ++i) d += (target[i] - x[i]) * (target[i] - x[i]);
    if (best == nullptr || d < best_d || (d == best_d && name < *best)) {
      best = &name;
      best_d = d;
    }
  }
  if (best == nullptr) throw std::out_of_range("vocabulary has no candidate entity");
  return *best;
}

AnalogyReport evaluate_analogies(const Vocabulary& v, std::span<const AnalogyQuery> queries) {
  AnalogyReport report;
  for (const auto& q : queries) {
    AnalogyResult r{q, answer_analogy(v, q.a, q.b, q.c), false};
    r.correct = r.answer == q.expected;
    report.correct += r.correct ? 1 : 0;
    report.results.push_back(std::move(r));
  }
  return report;
}

// ---- persistence -----------------------------------------------------------

VocabError::VocabError(std::size_t line, const std::string& msg)
    : std::runtime_error("vocab line " + std::to_string(line) + ": " + msg), line_(line) {}

std::string format_vocab(const Vocabulary& v) {
  std::string out = "peepvec-vocab v1 dim=" + std::to_string(v.dim()) + "\n";
  for (const auto& [k, val] : v.meta) out += "M " + k + " " + val + "\n";
  auto row = [&](char tag, std::string_view name, std::span<const double> xs) {
    out += tag;
    out += ' ';
    out += name;
    for (double x : xs) {
      out += ' ';
      append_number(out, x);
    }
    out += '\n';
  };
  for (std::size_t e = 0; e < v.entity_count(); ++e) row('E', v.entity_names()[e], v.entity(e));
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    row('R', relation_name(static_cast<Relation>(r)), v.relation(static_cast<Relation>(r)));
  }
  return out;
}

Vocabulary parse_vocab(std::string_view text) {
  std::size_t pos = 0;
  std::size_t lineno = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    return true;
  };
  std::string_view line;
  if (!next_line(line)) throw VocabError(1, "empty file");
  constexpr std::string_view kMagic = "peepvec-vocab ";
  if (line.substr(0, kMagic.size()) != kMagic) throw VocabError(1, "missing peepvec-vocab header");
  line.remove_prefix(kMagic.size());
  if (line.substr(0, 3) != "v1 ") throw VocabError(1, "unsupported version '" + std::string(line.substr(0, line.find(' '))) + "'");
  line.remove_prefix(3);
  std::size_t dim = 0;
  if (line.substr(0, 4) != "dim=" ||
      std::from_chars(line.data() + 4, line.data() + line.size(), dim).ptr != line.data() + line.size() ||
      dim == 0) {
    throw VocabError(1, "malformed dim");
  }

  std::map<std::string, std::string> meta;
  std::vector<std::string> names;
  std::vector<double> ents;
  std::vector<double> rels(kRelationCount * dim, 0.0);
  std::vector<char> seen_rel(kRelationCount, 0);
  while (next_line(line)) {
    if (line.empty()) continue;
    if (line.size() < 2 || line[1] != ' ') throw VocabError(lineno, "malformed line");
    const char tag = line[0];
    line.remove_prefix(2);
    const std::size_t sp = line.find(' ');
    const std::string name(line.substr(0, sp));
    if (name.empty()) throw VocabError(lineno, "missing name");
    if (tag == 'M') {
      meta[name] = sp == std::string_view::npos ? "" : std::string(line.substr(sp + 1));
      continue;
    }
    if (tag != 'E' && tag != 'R') throw VocabError(lineno, "unknown record type");
    std::vector<double> xs;
    xs.reserve(dim);
    std::size_t p = sp == std::string_view::npos ? line.size() : sp;
    while (p < line.size()) {
      if (line[p] != ' ') throw VocabError(lineno, "malformed number");
      ++p;
      double x = 0;
      auto res = std::from_chars(line.data() + p, line.data() + line.size(), x);
      if (res.ec != std::errc()) throw VocabError(lineno, "malformed number");
      xs.push_back(x);
      p = static_cast<std::size_t>(res.ptr - line.data());
    }
    if (xs.size() != dim) {
      throw VocabError(lineno, "expected " + std::to_string(dim) + " values, got " + std::to_string(xs.size()));
    }
    if (tag == 'E') {
      names.push_back(name);
      ents.insert(ents.end(), xs.begin(), xs.end());
    } else {
      auto r = parse_relation(name);
      if (!r) throw VocabError(lineno, "unknown relation '" + name + "'");
      const auto ri = static_cast<std::size_t>(*r);
      if (seen_rel[ri]) throw VocabError(lineno, "duplicate relation '" + name + "'");
      seen_rel[ri] = 1;
      std::copy(xs.begin(), xs.end(), rels.begin() + static_cast<std::ptrdiff_t>(ri * dim));
    }
  }
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    if (!seen_rel[r]) {
      throw VocabError(lineno + 1, "missing relation " + std::string(relation_name(static_cast<Relation>(r))));
    }
  }
  Vocabulary v;
  try {
    v = Vocabulary(dim, std::move(names));
  } catch (const std::invalid_argument& e) {
    throw VocabError(lineno, e.what());
  }
  v.entity_data() = std::move(ents);
  v.relation_data() = std::move(rels);
  v.meta = std::move(meta);
  return v;
}

void save_vocab(const Vocabulary& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_vocab(v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_vocab(ss.str());
}

}  // namespace peepvec
