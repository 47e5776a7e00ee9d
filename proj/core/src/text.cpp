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

#include "peepvec/text.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace peepvec {

ParseError::ParseError(ParseErrorKind kind, std::size_t line, std::size_t column,
                       const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " +
                         msg),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { kWord, kString, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;  // word, decoded string, or the punctuation char
  std::size_t column = 0;
};

bool is_punct(char c) {
  return c == '(' || c == ')' || c == ',' || c == ':' || c == '=';
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Decodes a quoted string at the start of s; returns the characters consumed.
// `base` is the column offset used in error messages.
std::size_t decode_quoted(std::string_view s, std::string& out, std::size_t line_no,
                          std::size_t base) {
  std::size_t i = 1;
  while (i < s.size()) {
    const char d = s[i];
    if (d == '"') return i + 1;
    if (d != '\\') {
      out.push_back(d);
      ++i;
      continue;
    }
    if (i + 1 >= s.size()) break;
    const char e = s[i + 1];
    i += 2;
    switch (e) {
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'x': {
        const int hi = i < s.size() ? hex_digit(s[i]) : -1;
        const int lo = i + 1 < s.size() ? hex_digit(s[i + 1]) : -1;
        if (hi < 0 || lo < 0) {
          throw ParseError(ParseErrorKind::kSyntax, line_no, base + i + 1, "bad \\x escape");
        }
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        break;
      }
      default:
        throw ParseError(ParseErrorKind::kSyntax, line_no, base + i - 1,
                         std::string("unknown escape \\") + e);
    }
  }
  throw ParseError(ParseErrorKind::kSyntax, line_no, base + 1, "unterminated string");
}

class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t line_no) : line_no_(line_no) { lex(line); }

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  Token next() {
    Token t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::kEnd; }
  std::size_t line() const { return line_no_; }

  [[noreturn]] void fail(const Token& t, const std::string& msg,
                         ParseErrorKind kind = ParseErrorKind::kSyntax) const {
    throw ParseError(kind, line_no_, t.column, msg);
  }
  void expect_punct(char c) {
    Token t = next();
    if (t.kind != Tok::kPunct || t.text[0] != c) {
      fail(t, std::string("expected '") + c + "'");
    }
  }
  bool accept_punct(char c) {
    if (peek().kind == Tok::kPunct && peek().text[0] == c) {
      next();
      return true;
    }
    return false;
  }
  std::string expect_word() {
    Token t = next();
    if (t.kind != Tok::kWord) fail(t, "expected a word");
    return t.text;
  }
  std::string expect_string() {
    Token t = next();
    if (t.kind != Tok::kString) fail(t, "expected a quoted string");
    return t.text;
  }
  void expect_end() {
    if (!at_end()) fail(peek(), "unexpected trailing token '" + peek().text + "'");
  }

 private:
  void lex(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
      const char c = s[i];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (c == '#') {
        break;
      } else if (is_punct(c)) {
        toks_.push_back({Tok::kPunct, std::string(1, c), i + 1});
        ++i;
      } else if (c == '"') {
        std::string out;
        const std::size_t used = decode_quoted(s.substr(i), out, line_no_, i);
        toks_.push_back({Tok::kString, std::move(out), i + 1});
        i += used;
      } else {
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r' && s[i] != '"' &&
               s[i] != '#' && !is_punct(s[i])) {
          ++i;
        }
        toks_.push_back({Tok::kWord, std::string(s.substr(start, i - start)), start + 1});
      }
    }
    toks_.push_back({Tok::kEnd, "<end of line>", s.size() + 1});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

std::optional<std::uint64_t> parse_u64(std::string_view s, int base) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint32_t> parse_id(std::string_view s) {
  auto v = parse_u64(s, 10);
  if (!v || *v >= kAbstractId) return std::nullopt;
  return static_cast<std::uint32_t>(*v);
}

// Magnitude of a hex or decimal digit string; nullopt on overflow of int128.
std::optional<int128> parse_magnitude(std::string_view digits, int base) {
  if (digits.empty()) return std::nullopt;
  using u128 = unsigned __int128;
  const u128 limit = (static_cast<u128>(1) << 127);  // |INT128_MIN|
  u128 v = 0;
  for (char c : digits) {
    const int d = hex_digit(c);
    if (d < 0 || d >= base) return std::nullopt;
    if (v > (limit - static_cast<u128>(d)) / static_cast<u128>(base)) return std::nullopt;
    v = v * static_cast<u128>(base) + static_cast<u128>(d);
  }
  // The caller negates; a magnitude of 2^127 is representable only negated.
  return static_cast<int128>(v);
}

std::string u128_to_string(unsigned __int128 v, int base) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    const int d = static_cast<int>(v % static_cast<unsigned>(base));
    s.push_back(static_cast<char>(d < 10 ? '0' + d : 'a' + d - 10));
    v /= static_cast<unsigned>(base);
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string format_double(double d) {
  if (std::isnan(d)) {
    char buf[17];
    auto [p, ec] = std::to_chars(buf, buf + 16, std::bit_cast<std::uint64_t>(d), 16);
    (void)ec;
    std::string hex(buf, p);
    return "nan_" + std::string(16 - hex.size(), '0') + hex;
  }
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  (void)ec;
  return std::string(buf, p);
}

std::optional<double> parse_double(std::string_view s) {
  if (s.starts_with("nan_")) {
    auto bits = parse_u64(s.substr(4), 16);
    if (!bits || s.size() != 20) return std::nullopt;
    const double d = std::bit_cast<double>(*bits);
    if (!std::isnan(d)) return std::nullopt;
    return d;
  }
  if (s == "nan") return std::bit_cast<double>(0x7FF8000000000000ull);
  double d = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc() || p != s.data() + s.size() || std::isnan(d)) return std::nullopt;
  return d;
}

struct Parser {
  const ParseOptions& opts;
  const OpcodeTable& table;

  // Per-function bookkeeping for the invariant checks.
  std::unordered_set<std::uint32_t> tmps;
  struct PendingCall {
    std::string callee;
    std::size_t line;
  };
  std::vector<PendingCall> internal_calls;

  Parser(const ParseOptions& o)
      : opts(o), table(o.opcodes != nullptr ? *o.opcodes : OpcodeTable::builtin()) {}

  // Parses an operand; `default_type` types untyped hex constants.
  Operand operand(LineLexer& lx, IrType default_type) {
    const Token t = lx.next();
    if (t.kind != Tok::kWord) lx.fail(t, "expected an operand");
    const std::string& w = t.text;
    if (auto tok = parse_token(w)) return Abstract{*tok};
    if (w.size() > 1 && (w[0] == 't' || w[0] == 'r' || w[0] == 'M')) {
      if (auto id = parse_id(std::string_view(w).substr(1))) {
        if (w[0] == 't') return TmpRef{*id};
        if (w[0] == 'r') return RegRef{*id};
        return MemRef{*id};
      }
    }
    if (w.starts_with("0x") || w.starts_with("-")) {
      const bool neg = w[0] == '-';
      auto mag = neg ? parse_magnitude(std::string_view(w).substr(1), 10)
                     : parse_magnitude(std::string_view(w).substr(2), 16);
      if (!mag) lx.fail(t, "bad integer constant '" + w + "'");
      if (!neg && *mag < 0) lx.fail(t, "integer constant out of range '" + w + "'");
      IntConst c{neg ? static_cast<int128>(-static_cast<unsigned __int128>(*mag)) : *mag,
                 default_type};
      if (lx.accept_punct(':')) {
        const Token ty = lx.next();
        auto parsed = ty.kind == Tok::kWord ? parse_type(ty.text) : std::nullopt;
        if (!parsed) lx.fail(ty, "expected a type");
        c.type = *parsed;
      } else if (neg) {
        lx.fail(lx.peek(), "negative constants need a type");
      }
      return c;
    }
    if (w.size() > 1 && w[0] == 'f') {
      if (auto d = parse_double(std::string_view(w).substr(1))) return FloatConst{*d};
    }
    lx.fail(t, "bad operand '" + w + "'");
  }

  std::vector<Operand> arg_list(LineLexer& lx, IrType default_type) {
    std::vector<Operand> args;
    lx.expect_punct('(');
    if (lx.accept_punct(')')) return args;
    for (;;) {
      args.push_back(operand(lx, default_type));
      if (lx.accept_punct(')')) return args;
      lx.expect_punct(',');
    }
  }

  std::uint32_t reg_in_parens(LineLexer& lx) {
    lx.expect_punct('(');
    const Token t = lx.next();
    std::uint32_t id = 0;
    if (t.kind == Tok::kWord && t.text == "REG") {
      id = kAbstractId;
    } else if (t.kind == Tok::kWord && t.text.size() > 1 && t.text[0] == 'r') {
      auto v = parse_id(std::string_view(t.text).substr(1));
      if (!v) lx.fail(t, "bad register");
      id = *v;
    } else {
      lx.fail(t, "expected a register");
    }
    lx.expect_punct(')');
    return id;
  }

  IrType type_after_colon(LineLexer& lx) {
    lx.expect_punct(':');
    const Token t = lx.next();
    auto ty = t.kind == Tok::kWord ? parse_type(t.text) : std::nullopt;
    if (!ty) lx.fail(t, "expected a type");
    return *ty;
  }

  Call call_tail(LineLexer& lx, IrType default_type) {
    Call c;
    const Token kind = lx.next();
    if (kind.kind != Tok::kWord || (kind.text != "int" && kind.text != "ext")) {
      lx.fail(kind, "expected call kind 'int' or 'ext'");
    }
    c.external = kind.text == "ext";
    c.callee = lx.expect_string();
    c.args = arg_list(lx, default_type);
    if (!c.external) internal_calls.push_back({c.callee, lx.line()});
    return c;
  }

  Expression expression(LineLexer& lx, IrType type) {
    const Token& t = lx.peek();
    const bool call_like = lx.peek(1).kind == Tok::kPunct && lx.peek(1).text == "(";
    if (t.kind == Tok::kWord && call_like) {
      const Token head = lx.next();
      if (head.text == "get" || head.text == "geti") {
        const std::uint32_t reg = reg_in_parens(lx);
        const IrType ty = type_after_colon(lx);
        if (head.text == "get") return GetReg{reg, ty};
        return GetRegI{reg, ty};
      }
      if (head.text == "load") {
        lx.expect_punct('(');
        Operand addr = operand(lx, IrType::I64);
        lx.expect_punct(')');
        return Load{std::move(addr), type_after_colon(lx)};
      }
      const OpcodeEntry* entry = table.find(head.text);
      if (entry == nullptr && head.text != kUnknownOpcode) {
        lx.fail(head, "unknown opcode '" + head.text + "'", ParseErrorKind::kUnknownOpcode);
      }
      OpExpr op{head.text, arg_list(lx, type)};
      if (op.args.empty() || op.args.size() > 3) lx.fail(head, "opcodes take 1 to 3 operands");
      if (opts.check_invariants && entry != nullptr) {
        const OpInfo* info = find_op(entry->canonical);
        if (info != nullptr && static_cast<std::size_t>(info->arity) != op.args.size()) {
          lx.fail(head,
                  "opcode '" + head.text + "' takes " + std::to_string(info->arity) +
                      " operands",
                  ParseErrorKind::kSemantic);
        }
      }
      return op;
    }
    return ConstExpr{operand(lx, type)};
  }

  Statement statement(LineLexer& lx) {
    const Token head = lx.peek();
    if (head.kind != Tok::kWord) lx.fail(head, "expected a statement");
    const std::string& w = head.text;
    if (w == "put" || w == "puti") {
      lx.next();
      const std::uint32_t reg = reg_in_parens(lx);
      lx.expect_punct('=');
      Operand v = operand(lx, IrType::I64);
      lx.expect_end();
      if (w == "put") return PutReg{reg, std::move(v)};
      return PutRegI{reg, std::move(v)};
    }
    if (w == "store") {
      lx.next();
      lx.expect_punct('(');
      Operand addr = operand(lx, IrType::I64);
      lx.expect_punct(')');
      lx.expect_punct('=');
      Operand v = operand(lx, IrType::I64);
      lx.expect_end();
      return Store{std::move(addr), std::move(v)};
    }
    if (w == "call") {
      lx.next();
      Call c = call_tail(lx, IrType::I64);
      lx.expect_end();
      return c;
    }
    // Assignment: TMP ":" TY "=" rhs.
    lx.next();
    std::uint32_t tmp = 0;
    if (w == "VAR") {
      tmp = kAbstractId;
    } else {
      std::optional<std::uint32_t> id;
      if (w.size() > 1 && w[0] == 't') id = parse_id(std::string_view(w).substr(1));
      if (!id) lx.fail(head, "expected a statement, got '" + w + "'");
      tmp = *id;
    }
    const IrType type = type_after_colon(lx);
    lx.expect_punct('=');
    if (tmp != kAbstractId && opts.check_invariants && !tmps.insert(tmp).second) {
      lx.fail(head, "tmp t" + std::to_string(tmp) + " assigned twice",
              ParseErrorKind::kDuplicateTmp);
    }
    if (lx.peek().kind == Tok::kWord && lx.peek().text == "call" &&
        lx.peek(1).kind == Tok::kWord) {
      lx.next();
      Call c = call_tail(lx, type);
      c.result = CallResult{tmp, type};
      lx.expect_end();
      return c;
    }
    Expression e = expression(lx, type);
    lx.expect_end();
    return TmpAssign{tmp, type, std::move(e)};
  }
};

struct BlockLines {
  std::size_t bb_line = 0;
  std::size_t succ_line = 0;
};

}  // namespace

Program parse_program(std::string_view text, const ParseOptions& options) {
  Program prog;
  Parser parser(options);
  IrFunction* fn = nullptr;
  BasicBlock* block = nullptr;  // open block awaiting its succ line
  bool seen_content = false;
  std::size_t fn_line = 0;
  std::vector<BlockLines> block_lines;
  std::unordered_map<std::string, std::size_t> fn_names;
  std::vector<Parser::PendingCall> calls;

  auto finish_function = [&](std::size_t line_no) {
    if (fn == nullptr) return;
    if (block != nullptr) {
      throw ParseError(ParseErrorKind::kSyntax, line_no, 1,
                       "block " + std::to_string(block->id) + " has no succ line");
    }
    if (fn->blocks.empty()) {
      throw ParseError(ParseErrorKind::kSyntax, fn_line, 1,
                       "function '" + fn->name + "' has no blocks");
    }
    // Stable sort so blocks are addressable by id.
    std::vector<std::size_t> order(fn->blocks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fn->blocks[a].id < fn->blocks[b].id;
    });
    std::vector<BasicBlock> sorted;
    std::vector<BlockLines> lines;
    for (std::size_t i : order) {
      sorted.push_back(std::move(fn->blocks[i]));
      lines.push_back(block_lines[i]);
    }
    fn->blocks = std::move(sorted);
    if (options.check_invariants) {
      for (std::size_t i = 0; i < fn->blocks.size(); ++i) {
        if (fn->blocks[i].id != i) {
          throw ParseError(ParseErrorKind::kSemantic, lines[i].bb_line, 1,
                           "block ids of '" + fn->name + "' are not dense from 0");
        }
      }
      for (std::size_t i = 0; i < fn->blocks.size(); ++i) {
        for (std::uint32_t s : fn->blocks[i].successors) {
          if (s >= fn->blocks.size()) {
            throw ParseError(ParseErrorKind::kDanglingSuccessor, lines[i].succ_line, 1,
                             "successor " + std::to_string(s) + " of block " +
                                 std::to_string(fn->blocks[i].id) + " does not exist");
          }
        }
      }
      if (fn->find_block(fn->entry) == nullptr) {
        throw ParseError(ParseErrorKind::kSemantic, fn_line, 1,
                         "entry block " + std::to_string(fn->entry) + " does not exist");
      }
    }
    calls.insert(calls.end(), parser.internal_calls.begin(), parser.internal_calls.end());
    parser.internal_calls.clear();
    parser.tmps.clear();
    block_lines.clear();
    fn = nullptr;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    LineLexer lx(line, line_no);
    if (lx.at_end()) continue;
    const Token head = lx.peek();
    if (head.kind != Tok::kWord) lx.fail(head, "expected a keyword or statement");

    if (head.text == "program") {
      if (seen_content) lx.fail(head, "program header must come first");
      lx.next();
      prog.name = lx.expect_string();
      lx.expect_end();
      seen_content = true;
      continue;
    }
    seen_content = true;

    if (head.text == "fn") {
      finish_function(line_no);
      lx.next();
      IrFunction f;
      f.name = lx.expect_string();
      if (lx.expect_word() != "addr") lx.fail(head, "expected addr=");
      lx.expect_punct('=');
      const Token a = lx.next();
      std::optional<std::uint64_t> addr;
      if (a.kind == Tok::kWord && a.text.starts_with("0x")) {
        addr = parse_u64(std::string_view(a.text).substr(2), 16);
      }
      if (!addr) lx.fail(a, "bad address");
      f.address = *addr;
      if (lx.peek().kind == Tok::kWord && lx.peek().text == "entry") {
        lx.next();
        lx.expect_punct('=');
        const Token e = lx.next();
        auto id = e.kind == Tok::kWord ? parse_id(e.text) : std::nullopt;
        if (!id) lx.fail(e, "bad entry block id");
        f.entry = *id;
      }
      lx.expect_end();
      if (options.check_invariants && fn_names.count(f.name) != 0) {
        lx.fail(head, "duplicate function '" + f.name + "'", ParseErrorKind::kSemantic);
      }
      fn_names.emplace(f.name, prog.functions.size());
      prog.functions.push_back(std::move(f));
      fn = &prog.functions.back();
      fn_line = line_no;
      continue;
    }
    if (fn == nullptr) lx.fail(head, "expected 'fn'");

    if ((head.text == "str" || head.text == "call") && lx.peek(1).kind == Tok::kString) {
      if (!fn->blocks.empty()) lx.fail(head, "metadata must precede the first block");
      lx.next();
      std::string s = lx.expect_string();
      lx.expect_end();
      (head.text == "str" ? fn->strings : fn->extern_calls).push_back(std::move(s));
      continue;
    }
    if (head.text == "bb") {
      if (block != nullptr) lx.fail(head, "previous block has no succ line");
      lx.next();
      const Token idt = lx.next();
      auto id = idt.kind == Tok::kWord ? parse_id(idt.text) : std::nullopt;
      if (!id) lx.fail(idt, "bad block id");
      lx.expect_end();
      for (const auto& b : fn->blocks) {
        if (b.id == *id) {
          lx.fail(idt, "duplicate block " + std::to_string(*id),
                  ParseErrorKind::kDuplicateBlock);
        }
      }
      fn->blocks.push_back(BasicBlock{*id, {}, {}});
      block_lines.push_back({line_no, 0});
      block = &fn->blocks.back();
      continue;
    }
    if (head.text == "succ") {
      if (block == nullptr) lx.fail(head, "succ outside a block");
      lx.next();
      while (!lx.at_end()) {
        const Token s = lx.next();
        auto id = s.kind == Tok::kWord ? parse_id(s.text) : std::nullopt;
        if (!id) lx.fail(s, "bad successor id");
        block->successors.push_back(*id);
      }
      block_lines.back().succ_line = line_no;
      block = nullptr;
      continue;
    }
    if (block == nullptr) lx.fail(head, "statement outside a block");
    block->statements.push_back(parser.statement(lx));
  }
  finish_function(line_no);

  if (options.check_invariants) {
    for (const auto& c : calls) {
      if (fn_names.count(c.callee) == 0) {
        throw ParseError(ParseErrorKind::kSemantic, c.line, 1,
                         "internal call to unknown function '" + c.callee + "'");
      }
    }
  }
  return prog;
}

Program load_program(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str(), options);
}

Statement parse_statement(std::string_view line, const ParseOptions& options) {
  ParseOptions o = options;
  o.check_invariants = false;
  Parser parser(o);
  LineLexer lx(line, 1);
  return parser.statement(lx);
}

std::size_t unquote_prefix(std::string_view s, std::string& out) {
  if (s.empty() || s[0] != '"') throw ParseError(ParseErrorKind::kSyntax, 1, 1, "expected '\"'");
  return decode_quoted(s, out, 1, 0);
}

std::string quote_string(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "\"";
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          out += "\\x";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 15]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string format_operand(const Operand& o) {
  return std::visit(
      Overloaded{
          [](const TmpRef& t) { return "t" + std::to_string(t.id); },
          [](const RegRef& r) { return "r" + std::to_string(r.id); },
          [](const MemRef& m) { return "M" + std::to_string(m.id); },
          [](const Abstract& a) { return std::string(token_name(a.token)); },
          [](const FloatConst& f) { return "f" + format_double(f.value); },
          [](const IntConst& c) {
            using u128 = unsigned __int128;
            std::string s = c.value < 0 ? "-" + u128_to_string(-static_cast<u128>(c.value), 10)
                                        : "0x" + u128_to_string(static_cast<u128>(c.value), 16);
            return s + ":" + std::string(type_name(c.type));
          },
      },
      o);
}

namespace {
std::string reg_name(std::uint32_t id) {
  return id == kAbstractId ? std::string("REG") : "r" + std::to_string(id);
}
std::string tmp_name(std::uint32_t id) {
  return id == kAbstractId ? std::string("VAR") : "t" + std::to_string(id);
}
std::string join_args(const std::vector<Operand>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i != 0) s += ", ";
    s += format_operand(args[i]);
  }
  return s + ")";
}
}  // namespace

std::string format_expression(const Expression& e) {
  return std::visit(
      Overloaded{
          [](const GetReg& g) { return "get(" + reg_name(g.reg) + "):" + std::string(type_name(g.type)); },
          [](const GetRegI& g) {
            return "geti(" + reg_name(g.reg) + "):" + std::string(type_name(g.type));
          },
          [](const Load& l) {
            return "load(" + format_operand(l.addr) + "):" + std::string(type_name(l.type));
          },
          [](const OpExpr& op) { return op.opcode + join_args(op.args); },
          [](const ConstExpr& c) { return format_operand(c.value); },
      },
      e);
}

std::string format_statement(const Statement& s) {
  return std::visit(
      Overloaded{
          [](const TmpAssign& a) {
            return tmp_name(a.tmp) + ":" + std::string(type_name(a.type)) + " = " +
                   format_expression(a.expr);
          },
          [](const PutReg& p) { return "put(" + reg_name(p.reg) + ") = " + format_operand(p.value); },
          [](const PutRegI& p) {
            return "puti(" + reg_name(p.reg) + ") = " + format_operand(p.value);
          },
          [](const Store& st) {
            return "store(" + format_operand(st.addr) + ") = " + format_operand(st.value);
          },
          [](const Call& c) {
            std::string s;
            if (c.result) {
              s = tmp_name(c.result->tmp) + ":" + std::string(type_name(c.result->type)) + " = ";
            }
            s += c.external ? "call ext " : "call int ";
            return s + quote_string(c.callee) + join_args(c.args);
          },
      },
      s);
}

std::string serialize_program(const Program& p) {
  std::string out = "program " + quote_string(p.name) + "\n";
  for (const auto& f : p.functions) {
    out += "\nfn " + quote_string(f.name) + " addr=0x" + u128_to_string(f.address, 16);
    if (f.entry != 0) out += " entry=" + std::to_string(f.entry);
    out += "\n";
    for (const auto& s : f.strings) out += "str " + quote_string(s) + "\n";
    for (const auto& s : f.extern_calls) out += "call " + quote_string(s) + "\n";
    for (const auto& b : f.blocks) {
      out += "bb " + std::to_string(b.id) + "\n";
      for (const auto& s : b.statements) out += "  " + format_statement(s) + "\n";
      out += "succ";
      for (std::uint32_t s : b.successors) out += " " + std::to_string(s);
      out += "\n";
    }
  }
  return out;
}

void save_program(const Program& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_program(p);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace peepvec
