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

#include "peepvec/peephole.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "peepvec/text.hpp"

namespace peepvec {

Peephole make_peephole(const IrFunction& f, std::vector<std::uint32_t> block_ids) {
  Peephole p;
  for (std::uint32_t id : block_ids) {
    const BasicBlock* b = f.find_block(id);
    if (b == nullptr) throw std::out_of_range("no block " + std::to_string(id));
    p.statements.insert(p.statements.end(), b->statements.begin(), b->statements.end());
  }
  p.block_ids = std::move(block_ids);
  return p;
}

PeepholeSet generate_peepholes(const IrFunction& f, const PeepholeConfig& cfg, WalkTrace* trace) {
  if (cfg.k == 0 || cfg.c == 0) throw std::invalid_argument("k and c must be positive");
  const std::size_t n = f.blocks.size();
  // Position of each block id in f.blocks (ids are dense after validation).
  std::vector<std::size_t> index(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (f.blocks[i].id >= n) throw std::invalid_argument("block ids are not dense");
    index[f.blocks[i].id] = i;
  }

  Rng rng(hash_combine(cfg.seed, fnv1a64(f.name)));
  PeepholeSet out;
  out.visit_counts.assign(n, 0);
  // U as a sorted id list; rebuilt after each walk as {v : count[v] < c}.
  std::vector<std::uint32_t> worklist(n);
  for (std::size_t i = 0; i < n; ++i) worklist[i] = static_cast<std::uint32_t>(i);
  std::uint64_t deficit = static_cast<std::uint64_t>(n) * cfg.c;

  while (!worklist.empty()) {
    if (trace != nullptr) {
      trace->worklist_sizes.push_back(worklist.size());
      trace->deficits.push_back(deficit);
    }
    std::vector<std::uint32_t> path;
    std::uint32_t v = worklist[rng.uniform(worklist.size())];
    path.push_back(v);
    while (path.size() < cfg.k) {
      const auto& succ = f.blocks[index[v]].successors;
      if (succ.empty()) break;
      v = succ[rng.uniform(succ.size())];
      path.push_back(v);
    }
    for (std::uint32_t b : path) {
      if (out.visit_counts[b] < cfg.c) --deficit;
      ++out.visit_counts[b];
    }
    out.peepholes.push_back(make_peephole(f, std::move(path)));
    ++out.iterations;
    std::erase_if(worklist, [&](std::uint32_t b) { return out.visit_counts[b] >= cfg.c; });
  }
  return out;
}

PeepholeStats expected_peephole_stats(const IrFunction& f, const PeepholeConfig& cfg,
                                      std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  PeepholeStats s;
  double peeps = 0;
  double visits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    PeepholeConfig c = cfg;
    c.seed = cfg.seed + i;
    const PeepholeSet set = generate_peepholes(f, c);
    peeps += static_cast<double>(set.peepholes.size());
    for (auto v : set.visit_counts) visits += v;
    s.max_peepholes = std::max(s.max_peepholes, set.peepholes.size());
  }
  s.mean_peepholes = peeps / static_cast<double>(trials);
  s.mean_visits = visits / static_cast<double>(trials);
  s.bound = static_cast<double>(cfg.c) * static_cast<double>(f.blocks.size());
  s.reference = s.bound / 2;
  return s;
}

std::string format_peep_dump(std::string_view fn_name, const PeepholeSet& set) {
  std::string out;
  for (const auto& p : set.peepholes) {
    out += "peep " + quote_string(fn_name);
    for (auto id : p.block_ids) out += " " + std::to_string(id);
    out += "\n";
  }
  return out;
}

std::vector<PeepLine> parse_peep_dump(std::string_view text) {
  std::vector<PeepLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto bad = [&](const char* what) {
      return std::runtime_error("peep dump line " + std::to_string(line_no) + ": " + what);
    };
    if (!line.starts_with("peep \"")) throw bad("expected 'peep \"name\"'");
    PeepLine pl;
    std::size_t i = 5;
    try {
      i += unquote_prefix(line.substr(i), pl.function);
    } catch (const ParseError&) {
      throw bad("bad function name");
    }
    while (i < line.size()) {
      if (line[i] == ' ') {
        ++i;
        continue;
      }
      std::uint32_t id = 0;
      auto [p, ec] = std::from_chars(line.data() + i, line.data() + line.size(), id);
      if (ec != std::errc()) throw bad("bad block id");
      i = static_cast<std::size_t>(p - line.data());
      pl.block_ids.push_back(id);
    }
    if (pl.block_ids.empty()) throw bad("empty block list");
    out.push_back(std::move(pl));
  }
  return out;
}

}  // namespace peepvec
