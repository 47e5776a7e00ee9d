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

#include "peepvec/opcodes.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "peepvec/rng.hpp"

namespace peepvec {

extern const char* const kBuiltinOpcodeTable;  // generated from opcodes.tbl

namespace {

constexpr std::array kOps = {
    OpInfo{"cast", 1},     OpInfo{"add", 2},      OpInfo{"sub", 2},
    OpInfo{"mul", 2},      OpInfo{"div", 2},      OpInfo{"divmod", 2},
    OpInfo{"and", 2},      OpInfo{"or", 2},       OpInfo{"xor", 2},
    OpInfo{"not", 1},      OpInfo{"neg", 1},      OpInfo{"shl", 2},
    OpInfo{"shr", 2},      OpInfo{"sar", 2},      OpInfo{"cmpeq", 2},
    OpInfo{"cmpne", 2},    OpInfo{"cmplt", 2},    OpInfo{"cmple", 2},
    OpInfo{"clz", 1},      OpInfo{"ctz", 1},      OpInfo{"popcnt", 1},
    OpInfo{"max", 2},      OpInfo{"min", 2},      OpInfo{"ite", 3},
    OpInfo{"addf", 2},     OpInfo{"subf", 2},     OpInfo{"mulf", 2},
    OpInfo{"divf", 2},     OpInfo{"negf", 1},     OpInfo{"absf", 1},
    OpInfo{"sqrtf", 1},    OpInfo{"cmpf", 2},     OpInfo{"maxf", 2},
    OpInfo{"minf", 2},     OpInfo{"fmaf", 3},     OpInfo{"fmsf", 3},
    OpInfo{"itof", 1},     OpInfo{"ftoi", 1},     OpInfo{"extf", 1},
    OpInfo{"truncf", 1},   OpInfo{"roundf", 1},   OpInfo{"sinf", 1},
    OpInfo{"cosf", 1},     OpInfo{"tanf", 1},     OpInfo{"atanf", 1},
    OpInfo{"yl2xf", 2},    OpInfo{"scalef", 2},   OpInfo{"premf", 2},
    OpInfo{"addv", 2, true},     OpInfo{"subv", 2, true},
    OpInfo{"mulv", 2, true},     OpInfo{"andv", 2, true},
    OpInfo{"orv", 2, true},      OpInfo{"xorv", 2, true},
    OpInfo{"notv", 1, true},     OpInfo{"shlv", 2, true},
    OpInfo{"shrv", 2, true},     OpInfo{"sarv", 2, true},
    OpInfo{"cmpeqv", 2, true},   OpInfo{"cmpgtv", 2, true},
    OpInfo{"maxv", 2, true},     OpInfo{"minv", 2, true},
    OpInfo{"avgv", 2, true},     OpInfo{"qaddv", 2, true},
    OpInfo{"qsubv", 2, true},    OpInfo{"absv", 1, true},
    OpInfo{"ilov", 2, true},     OpInfo{"ihiv", 2, true},
    OpInfo{"permv", 2, true},    OpInfo{"dupv", 1, true},
    OpInfo{"catv", 2, true},     OpInfo{"slicev", 1, true},
    OpInfo{"cntv", 1, true},     OpInfo{"clzv", 1, true},
    OpInfo{"sadv", 2, true},     OpInfo{"narrowv", 2, true},
    OpInfo{"getelemv", 2, true}, OpInfo{"setelemv", 3, true},
    OpInfo{"haddv", 2, true},    OpInfo{"setlov", 2, true},
    OpInfo{"zerohiv", 1, true},  OpInfo{"addfv", 2, true},
    OpInfo{"subfv", 2, true},    OpInfo{"mulfv", 2, true},
    OpInfo{"divfv", 2, true},    OpInfo{"maxfv", 2, true},
    OpInfo{"minfv", 2, true},    OpInfo{"sqrtfv", 1, true},
    OpInfo{"cmpeqfv", 2, true},  OpInfo{"cmpltfv", 2, true},
    OpInfo{"cmplefv", 2, true},  OpInfo{"recipfv", 1, true},
    OpInfo{"rsqrtfv", 1, true},  OpInfo{"negfv", 1, true},
    OpInfo{"absfv", 1, true},    OpInfo{"itofv", 1, true},
    OpInfo{"ftoiv", 1, true},    OpInfo{"addfsv", 2, true},
    OpInfo{"mulfsv", 2, true},
};

double as_f(std::uint64_t b) { return std::bit_cast<double>(b); }
std::uint64_t from_f(double d) { return std::bit_cast<std::uint64_t>(d); }
std::int64_t as_s(std::uint64_t b) { return static_cast<std::int64_t>(b); }

std::int64_t sdiv(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return a;
  return a / b;
}
std::int64_t srem(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  if (b == -1) return 0;
  return a % b;
}

std::int64_t saturating_ftoi(double d) {
  if (std::isnan(d)) return 0;
  if (d >= 9.2233720368547758e18) return std::numeric_limits<std::int64_t>::max();
  if (d <= -9.2233720368547758e18) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(d);
}

// VEX CmpF64 result encoding.
std::uint64_t cmpf_code(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return 0x45;
  if (a < b) return 0x01;
  if (a > b) return 0x00;
  return 0x40;
}

// Vector opcodes have no folding; the interpreter still needs a
// deterministic value for them.
std::uint64_t vector_mix(std::string_view name, std::span<const OpValue> args) {
  std::uint64_t h = fnv1a64(name);
  for (const auto& a : args) h = splitmix64(h ^ a.bits);
  return h;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

const OpInfo* find_op(std::string_view name) {
  for (const auto& op : kOps) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

std::span<const OpInfo> all_ops() { return kOps; }

OpcodeTable OpcodeTable::parse(std::string_view text) {
  OpcodeTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("opcode table line " + std::to_string(line_no) + ": " + why);
  };
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto fields = split_ws(line);
    if (fields.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (fields.size() != 5) fail("expected 5 fields, got " + std::to_string(fields.size()));
    OpcodeEntry e;
    e.raw = fields[0];
    e.canonical = fields[1];
    auto cls = parse_type(fields[2]);
    if (!cls || !is_canonical(*cls)) fail("bad type class '" + fields[2] + "'");
    e.type_class = *cls;
    auto flag = [&](const std::string& f) {
      if (f == "0") return false;
      if (f == "1") return true;
      fail("flag must be 0 or 1, got '" + f + "'");
      return false;
    };
    e.commutative = flag(fields[3]);
    e.foldable = flag(fields[4]);
    if (!find_op(e.canonical)) fail("canonical opcode '" + e.canonical + "' has no semantics");
    if (table.index_.count(e.raw)) fail("duplicate opcode '" + e.raw + "'");
    table.index_.emplace(e.raw, table.all_.size());
    table.all_.push_back(e);
    table.raw_.push_back(std::move(e));
    if (end == text.size()) break;
  }
  // Identity entries for canonical names, taking flags from the first raw
  // entry that maps to them.
  for (const auto& e : table.raw_) {
    if (e.canonical == kCastOpcode) continue;
    if (table.index_.count(e.canonical)) continue;
    OpcodeEntry id = e;
    id.raw = e.canonical;
    table.index_.emplace(id.raw, table.all_.size());
    table.all_.push_back(std::move(id));
  }
  return table;
}

OpcodeTable OpcodeTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open opcode table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const OpcodeTable& OpcodeTable::builtin() {
  static const OpcodeTable table = parse(kBuiltinOpcodeTable);
  return table;
}

const OpcodeEntry* OpcodeTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &all_[it->second];
}

std::vector<std::string> OpcodeTable::canonical_opcodes() const {
  std::vector<std::string> out;
  for (const auto& e : raw_) {
    if (e.canonical != kCastOpcode) out.push_back(e.canonical);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

OpValue eval_op(std::string_view name, std::span<const OpValue> args) {
  const OpInfo* info = find_op(name);
  if (!info || static_cast<int>(args.size()) != info->arity) return {0, true};
  for (const auto& a : args) {
    if (a.opaque) return {0, true};
  }
  if (info->is_vector) return {vector_mix(name, args), false};

  const std::uint64_t a = args[0].bits;
  const std::uint64_t b = args.size() > 1 ? args[1].bits : 0;
  const std::uint64_t c = args.size() > 2 ? args[2].bits : 0;
  auto f = [](double d) { return OpValue{from_f(d), false}; };
  auto u = [](std::uint64_t v) { return OpValue{v, false}; };

  if (name == "cast") return u(a);
  if (name == "add") return u(a + b);
  if (name == "sub") return u(a - b);
  if (name == "mul") return u(a * b);
  if (name == "div") return u(static_cast<std::uint64_t>(sdiv(as_s(a), as_s(b))));
  if (name == "divmod") {
    const auto q = static_cast<std::uint64_t>(sdiv(as_s(a), as_s(b)));
    const auto r = static_cast<std::uint64_t>(srem(as_s(a), as_s(b)));
    return u((r << 32) | (q & 0xFFFFFFFFu));
  }
  if (name == "and") return u(a & b);
  if (name == "or") return u(a | b);
  if (name == "xor") return u(a ^ b);
  if (name == "not") return u(~a);
  if (name == "neg") return u(0 - a);
  if (name == "shl") return u(a << (b & 63));
  if (name == "shr") return u(a >> (b & 63));
  if (name == "sar") return u(static_cast<std::uint64_t>(as_s(a) >> (b & 63)));
  if (name == "cmpeq") return u(a == b);
  if (name == "cmpne") return u(a != b);
  if (name == "cmplt") return u(as_s(a) < as_s(b));
  if (name == "cmple") return u(as_s(a) <= as_s(b));
  if (name == "clz") return u(static_cast<std::uint64_t>(std::countl_zero(a)));
  if (name == "ctz") return u(static_cast<std::uint64_t>(std::countr_zero(a)));
  if (name == "popcnt") return u(static_cast<std::uint64_t>(std::popcount(a)));
  if (name == "max") return u(std::max(a, b));
  if (name == "min") return u(std::min(a, b));
  if (name == "ite") return u(a != 0 ? b : c);

  const double x = as_f(a), y = as_f(b), z = as_f(c);
  if (name == "addf") return f(x + y);
  if (name == "subf") return f(x - y);
  if (name == "mulf") return f(x * y);
  if (name == "divf") return f(x / y);
  if (name == "negf") return u(a ^ 0x8000000000000000ull);
  if (name == "absf") return u(a & 0x7FFFFFFFFFFFFFFFull);
  if (name == "sqrtf") return f(std::sqrt(x));
  if (name == "cmpf") return u(cmpf_code(x, y));
  if (name == "maxf") return f(std::fmax(x, y));
  if (name == "minf") return f(std::fmin(x, y));
  if (name == "fmaf") return f(std::fma(x, y, z));
  if (name == "fmsf") return f(std::fma(x, y, -z));
  if (name == "itof") return f(static_cast<double>(as_s(a)));
  if (name == "ftoi") return u(static_cast<std::uint64_t>(saturating_ftoi(x)));
  if (name == "extf") return u(a);
  if (name == "truncf") return f(static_cast<double>(static_cast<float>(x)));
  if (name == "roundf") return f(std::round(x));
  if (name == "sinf") return f(std::sin(x));
  if (name == "cosf") return f(std::cos(x));
  if (name == "tanf") return f(std::tan(x));
  if (name == "atanf") return f(std::atan(x));
  if (name == "yl2xf") return f(y * std::log2(x));
  if (name == "scalef") return f(std::ldexp(x, static_cast<int>(saturating_ftoi(y) & 0x7FF) - 1023));
  if (name == "premf") return f(std::fmod(x, y));
  return {0, true};
}

bool can_fold(const OpcodeEntry& entry, std::span<const OpValue> args) {
  if (!entry.foldable) return false;
  const OpInfo* info = find_op(entry.canonical);
  if (!info || info->is_vector || static_cast<int>(args.size()) != info->arity) return false;
  for (const auto& a : args) {
    if (a.opaque) return false;
  }
  if ((entry.canonical == "div" || entry.canonical == "divmod") && args[1].bits == 0) {
    return false;
  }
  return true;
}

}  // namespace peepvec
