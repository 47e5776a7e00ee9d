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

#include "peepvec/embedder.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "peepvec/parallel.hpp"
#include "peepvec/rng.hpp"
#include "peepvec/text.hpp"

namespace peepvec {

namespace {

constexpr std::uint64_t kTextSeed = fnv1a64("peepvec-text-v1");

void add_scaled(std::vector<double>& acc, std::span<const double> x, double k = 1.0) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += k * x[i];
}

void append_number(std::string& out, double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

}  // namespace

InstructionVectors embed_instruction(const InstructionEntities& inst, const Vocabulary& v) {
  InstructionVectors out;
  const std::size_t d = v.dim();
  out.o.assign(v.entity(inst.opcode).begin(), v.entity(inst.opcode).end());
  out.t.assign(d, 0.0);
  if (inst.type) {
    const auto t = v.entity(type_name(*inst.type));
    out.t.assign(t.begin(), t.end());
  }
  out.a.assign(d, 0.0);
  for (AbstractToken tok : inst.args) add_scaled(out.a, v.entity(token_name(tok)));
  return out;
}

InstructionVectors embed_instruction(const Statement& s, const Vocabulary& v) {
  return embed_instruction(decompose(std::span<const Statement>(&s, 1)).front(), v);
}

void EntityCounts::add(const InstructionEntities& inst, const Vocabulary& v) {
  auto index = [&](std::string_view name) {
    auto i = v.find_entity(name);
    if (!i) throw std::out_of_range("entity missing from vocabulary: " + std::string(name));
    return *i;
  };
  ++o[index(inst.opcode)];
  if (inst.type) ++t[index(type_name(*inst.type))];
  for (AbstractToken tok : inst.args) ++a[index(token_name(tok))];
}

void EntityCounts::add(const EntityCounts& other, std::uint64_t times) {
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] += times * other.o[i];
    t[i] += times * other.t[i];
    a[i] += times * other.a[i];
  }
}

std::vector<double> weighted_sum(std::span<const std::uint64_t> counts, const Vocabulary& v) {
  std::vector<double> out(v.dim(), 0.0);
  for (std::size_t e = 0; e < counts.size(); ++e) {
    if (counts[e] != 0) add_scaled(out, v.entity(e), static_cast<double>(counts[e]));
  }
  return out;
}

// ---- call graph ------------------------------------------------------------

CallGraph::CallGraph(const Program& p) {
  for (const auto& f : p.functions) {
    if (!index_.emplace(f.name, names_.size()).second) {
      throw std::invalid_argument("duplicate function name: " + f.name);
    }
    names_.push_back(f.name);
  }
  edges_.resize(names_.size());
  for (std::size_t fi = 0; fi < p.functions.size(); ++fi) {
    for (const auto& b : p.functions[fi].blocks) {
      for (const auto& s : b.statements) {
        const auto* c = std::get_if<Call>(&s);
        if (c == nullptr || c->external) continue;
        auto it = index_.find(c->callee);
        if (it == index_.end()) throw std::invalid_argument("call to unknown function: " + c->callee);
        edges_[fi].push_back(it->second);
      }
    }
    std::sort(edges_[fi].begin(), edges_[fi].end());
    edges_[fi].erase(std::unique(edges_[fi].begin(), edges_[fi].end()), edges_[fi].end());
  }

  // Iterative Tarjan; components come out callees first.
  const std::size_t n = names_.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order(n, kUnvisited), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  scc_of_.assign(n, 0);
  std::size_t counter = 0;
  struct Frame {
    std::size_t node, edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != kUnvisited) continue;
    std::vector<Frame> frames = {{root, 0}};
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& fr = frames.back();
      const std::size_t u = fr.node;
      if (fr.edge < edges_[u].size()) {
        const std::size_t w = edges_[u][fr.edge++];
        if (order[w] == kUnvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[u] = std::min(low[u], order[w]);
        }
        continue;
      }
      if (low[u] == order[u]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          scc_of_[w] = sccs_.size();
          comp.push_back(w);
        } while (w != u);
        std::sort(comp.begin(), comp.end());
        sccs_.push_back(std::move(comp));
      }
      frames.pop_back();
      if (!frames.empty()) {
        const std::size_t parent = frames.back().node;
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }
}

std::size_t CallGraph::index(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown function: " + std::string(name));
  return it->second;
}

// ---- text ------------------------------------------------------------------

std::vector<double> text_bucket_vector(std::size_t bucket) {
  // Components are uniform in [-1, 1) and then normalized; only IEEE
  // arithmetic and sqrt are involved, so vectors are identical everywhere.
  Rng rng(hash_combine(kTextSeed, bucket));
  std::vector<double> v(kTextDim);
  double n = 0;
  for (double& x : v) {
    x = rng.uniform(-1.0, 1.0);
    n += x * x;
  }
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> embed_text(std::span<const std::string> items) {
  std::vector<double> out(kTextDim, 0.0);
  for (const auto& item : items) {
    std::string padded = "<";
    for (unsigned char ch : item) padded += static_cast<char>(std::tolower(ch));
    padded += '>';
    std::vector<double> sv(kTextDim, 0.0);
    for (std::size_t n = 3; n <= 5; ++n) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        const std::size_t bucket = fnv1a64(std::string_view(padded).substr(i, n)) & (kTextBuckets - 1);
        add_scaled(sv, text_bucket_vector(bucket));
      }
    }
    double norm = 0;
    for (double x : sv) norm += x * x;
    if (norm == 0) continue;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < kTextDim; ++i) out[i] += sv[i] / norm;
  }
  return out;
}

// ---- functions -------------------------------------------------------------

EntityCounts count_peepholes(std::span<const Peephole> peepholes, const Vocabulary& v,
                             const std::map<std::string, EntityCounts, std::less<>>* callee_counts,
                             std::vector<std::string>* externals) {
  EntityCounts counts(v.entity_count());
  for (const auto& p : peepholes) {
    const auto insts = decompose(p.statements);
    for (std::size_t i = 0; i < insts.size(); ++i) {
      if (const auto* c = std::get_if<Call>(&p.statements[i])) {
        if (!c->external && callee_counts != nullptr) {
          if (auto it = callee_counts->find(c->callee); it != callee_counts->end()) {
            counts.add(it->second);
            continue;
          }
        }
        if (c->external && externals != nullptr &&
            std::find(externals->begin(), externals->end(), c->callee) == externals->end()) {
          externals->push_back(c->callee);
        }
      }
      counts.add(insts[i], v);
    }
  }
  return counts;
}

FunctionEmbedding embedding_from_counts(const EntityCounts& c, const Vocabulary& v) {
  FunctionEmbedding e;
  e.O = weighted_sum(c.o, v);
  e.T = weighted_sum(c.t, v);
  e.A = weighted_sum(c.a, v);
  e.S.assign(kTextDim, 0.0);
  e.L.assign(kTextDim, 0.0);
  return e;
}

std::vector<FunctionEmbedding> embed_program(const Program& canonical, const Vocabulary& v,
                                             const EmbedOptions& options, std::string_view source) {
  const CallGraph graph(canonical);
  const std::size_t n = canonical.functions.size();
  std::vector<std::vector<Peephole>> peeps(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    const IrFunction& f = canonical.functions[i];
    for (const auto& p : generate_peepholes(f, options.peepholes).peepholes) {
      peeps[i].push_back(normalize_peephole(p, options.level));
    }
  });

  std::vector<EntityCounts> counts(n);
  std::vector<std::vector<std::string>> externals(n);
  std::map<std::string, EntityCounts, std::less<>> resolved;
  for (const auto& comp : graph.sccs()) {
    for (std::size_t f : comp) {
      externals[f] = canonical.functions[f].extern_calls;
      counts[f] = count_peepholes(peeps[f], v, &resolved, &externals[f]);
    }
    // Members become visible only once the whole component is done, so calls
    // inside a component stay plain call instructions.
    for (std::size_t f : comp) resolved.emplace(graph.name(f), counts[f]);
  }

  std::vector<FunctionEmbedding> out(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    const IrFunction& f = canonical.functions[i];
    out[i] = embedding_from_counts(counts[i], v);
    out[i].name = f.name;
    out[i].source = std::string(source);
    out[i].S = embed_text(f.strings);
    out[i].L = embed_text(externals[i]);
  });
  return out;
}

// ---- .femb files -----------------------------------------------------------

std::string format_embeddings(std::span<const FunctionEmbedding> fs) {
  std::string out = "peepvec-femb v1\n";
  if (!fs.empty() && !fs.front().source.empty()) out += "M source " + fs.front().source + "\n";
  for (const auto& f : fs) {
    out += "F ";
    const bool plain = !f.name.empty() && f.name.find_first_of(" \t\n\"\\") == std::string::npos;
    out += plain ? f.name : quote_string(f.name);
    for (auto [tag, vec] : {std::pair{"O", &f.O}, {"T", &f.T}, {"A", &f.A}, {"S", &f.S}, {"L", &f.L}}) {
      out += ' ';
      out += tag;
      for (double x : *vec) {
        out += ' ';
        append_number(out, x);
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<FunctionEmbedding> parse_embeddings(std::string_view text) {
  std::vector<FunctionEmbedding> out;
  std::string source;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("femb line " + std::to_string(lineno) + ": " + msg);
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (lineno == 1) {
      if (line != "peepvec-femb v1") fail("expected header 'peepvec-femb v1'");
      continue;
    }
    if (line.empty()) continue;
    if (line.substr(0, 9) == "M source ") {
      source = std::string(line.substr(9));
      continue;
    }
    if (line.substr(0, 2) != "F ") fail("expected F record");
    line.remove_prefix(2);
    FunctionEmbedding f;
    f.source = source;
    std::size_t p = 0;
    if (!line.empty() && line[0] == '"') {
      try {
        p = unquote_prefix(line, f.name);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else {
      p = std::min(line.find(' '), line.size());
      f.name = std::string(line.substr(0, p));
    }
    std::vector<double>* cur = nullptr;
    while (p < line.size()) {
      if (line[p] != ' ') fail("malformed record");
      ++p;
      const std::size_t q = std::min(line.find(' ', p), line.size());
      const std::string_view word = line.substr(p, q - p);
      if (word == "O") {
        cur = &f.O;
      } else if (word == "T") {
        cur = &f.T;
      } else if (word == "A") {
        cur = &f.A;
      } else if (word == "S") {
        cur = &f.S;
      } else if (word == "L") {
        cur = &f.L;
      } else {
        double x = 0;
        auto res = std::from_chars(word.data(), word.data() + word.size(), x);
        if (cur == nullptr || res.ec != std::errc() || res.ptr != word.data() + word.size()) {
          fail("malformed number '" + std::string(word) + "'");
        }
        cur->push_back(x);
      }
      p = q;
    }
    if (f.O.empty() || f.O.size() != f.T.size() || f.O.size() != f.A.size()) fail("O/T/A dimension mismatch");
    if (f.S.size() != kTextDim || f.L.size() != kTextDim) fail("S/L must have 100 values");
    out.push_back(std::move(f));
  }
  if (lineno == 0) throw std::runtime_error("femb: empty file");
  return out;
}

void save_embeddings(std::span<const FunctionEmbedding> fs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_embeddings(fs);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<FunctionEmbedding> load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str());
}

}  // namespace peepvec
