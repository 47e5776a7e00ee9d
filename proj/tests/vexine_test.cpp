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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "peepvec/canon.hpp"
#include "peepvec/synthgen.hpp"
#include "peepvec/text.hpp"
#include "peepvec/vexine.hpp"
#include "test_util.hpp"

namespace peepvec {
namespace {

std::vector<Statement> stmts(const std::vector<std::string>& lines) {
  ParseOptions opts;
  opts.check_invariants = false;
  std::vector<Statement> out;
  for (const auto& l : lines) out.push_back(parse_statement(l, opts));
  return out;
}

std::vector<std::string> lines(const std::vector<Statement>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(format_statement(x));
  return out;
}

std::vector<std::string> normalized(const std::vector<std::string>& in, NormLevel level) {
  return lines(normalize_statements(stmts(in), level));
}

TEST(NormLevels, NamesAndCumulativePasses) {
  for (auto l : {NormLevel::N0, NormLevel::N1, NormLevel::N2, NormLevel::N3}) {
    EXPECT_EQ(parse_norm_level(norm_level_name(l)), l);
  }
  EXPECT_FALSE(parse_norm_level("N4").has_value());
  EXPECT_TRUE(passes_for(NormLevel::N0).empty());
  const auto n1 = passes_for(NormLevel::N1);
  const auto n2 = passes_for(NormLevel::N2);
  const auto n3 = passes_for(NormLevel::N3);
  EXPECT_EQ(n1.size(), 3u);
  EXPECT_EQ(n2.size(), 5u);
  EXPECT_EQ(n3.size(), 8u);
  EXPECT_TRUE(std::equal(n1.begin(), n1.end(), n2.begin()));
  EXPECT_TRUE(std::equal(n2.begin(), n2.end(), n3.begin()));
  EXPECT_EQ(pass_name(n3.back()), "dead-temp");
}

// ---- reaching definitions ---------------------------------------------------

TEST(ReachingDefs, UseBeforeDefIsParam) {
  const auto u = reaching_defs(stmts({"put(r1) = t0"}));
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].def, kParam);
}

TEST(ReachingDefs, LatestDefinitionWins) {
  const auto u = reaching_defs(stmts({"t0:INT = get(r1):INT", "put(r2) = t0", "put(r3) = t0",
                                      "t0:INT = get(r2):INT", "put(r4) = 0x1:INT",
                                      "store(M0) = t0"}));
  ASSERT_EQ(u.back().stmt, 5u);
  EXPECT_EQ(u.back().def, 3u);
  // get(r2) at 3 reads the put at 1.
  EXPECT_EQ((UseSite{3, UseKind::kReg, 2, 1}), u[3]);
}

struct Read {
  UseKind kind;
  std::uint32_t id;
};

std::vector<Read> reads_of(const Statement& s) {
  std::vector<Read> out;
  if (const auto* a = std::get_if<TmpAssign>(&s)) {
    if (const auto* g = std::get_if<GetReg>(&a->expr)) out.push_back({UseKind::kReg, g->reg});
    if (const auto* g = std::get_if<GetRegI>(&a->expr)) out.push_back({UseKind::kRegI, g->reg});
  }
  for_each_operand(s, [&](const Operand& o) {
    if (const auto* t = std::get_if<TmpRef>(&o)) out.push_back({UseKind::kTmp, t->id});
    if (const auto* r = std::get_if<RegRef>(&o)) out.push_back({UseKind::kReg, r->id});
  });
  return out;
}

bool defines(const Statement& s, UseKind k, std::uint32_t id) {
  switch (k) {
    case UseKind::kTmp: return defined_tmp(s) == id;
    case UseKind::kReg: {
      const auto* p = std::get_if<PutReg>(&s);
      return p != nullptr && p->reg == id;
    }
    case UseKind::kRegI: {
      const auto* p = std::get_if<PutRegI>(&s);
      return p != nullptr && p->reg == id;
    }
  }
  return false;
}

TEST(ReachingDefs, MatchesQuadraticScan) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto p = gen_peephole(seed, 1 + seed % 80);
    std::vector<UseSite> want;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (const Read& r : reads_of(p[i])) {
        std::size_t def = kParam;
        for (std::size_t j = i; j-- > 0;) {
          if (defines(p[j], r.kind, r.id)) {
            def = j;
            break;
          }
        }
        want.push_back({i, r.kind, r.id, def});
      }
    }
    ASSERT_EQ(reaching_defs(p), want) << "seed " << seed;
  }
}

// ---- available expressions --------------------------------------------------

TEST(AvailableExprs, RecomputedExpression) {
  const auto av = available_exprs(stmts({"t1:INT = add(t0, 0x5:INT)", "t2:INT = add(t0, 0x5:INT)"}));
  ASSERT_EQ(av.size(), 2u);
  EXPECT_TRUE(av[0].empty());
  ASSERT_EQ(av[1].size(), 1u);
  EXPECT_EQ(av[1][0], (AvailableExpr{"INT add(t0, 0x5:INT)", 1}));
}

TEST(AvailableExprs, RedefinedOperandKills) {
  const auto av = available_exprs(stmts({"t1:INT = add(t0, 0x5:INT)", "t0:INT = get(r1):INT",
                                         "t2:INT = add(t0, 0x5:INT)"}));
  for (const auto& e : av[2]) EXPECT_NE(e.shape, "INT add(t0, 0x5:INT)");
}

TEST(AvailableExprs, SecondHolderSurvivesFirst) {
  const auto av = available_exprs(stmts({"t1:INT = add(t0, 0x5:INT)", "t2:INT = add(t0, 0x5:INT)",
                                         "t1:INT = get(r1):INT", "put(r2) = t2"}));
  EXPECT_EQ(av[3], (std::vector<AvailableExpr>{{"INT add(t0, 0x5:INT)", 2}, {"INT get(r1)", 1}}));
}

std::vector<AvailableExpr> brute_available(const std::vector<Statement>& p, std::size_t i) {
  std::map<std::string, std::uint32_t> found;
  for (std::size_t j = 0; j < i; ++j) {
    const auto* a = std::get_if<TmpAssign>(&p[j]);
    if (a == nullptr) continue;
    const auto shape = expression_shape(*a);
    if (!shape || found.count(*shape) != 0) continue;
    std::set<std::uint32_t> operands;
    for_each_operand(p[j], [&](const Operand& o) {
      if (const auto* t = std::get_if<TmpRef>(&o)) operands.insert(t->id);
    });
    bool ok = true;
    for (std::size_t k = j; k < i && ok; ++k) {
      if (auto d = defined_tmp(p[k]); d && operands.count(*d) != 0) ok = false;
      if (k == j) continue;
      if (defined_tmp(p[k]) == a->tmp) ok = false;
      const bool call = std::holds_alternative<Call>(p[k]);
      if (std::holds_alternative<Load>(a->expr) && (call || std::holds_alternative<Store>(p[k]))) ok = false;
      if (const auto* g = std::get_if<GetReg>(&a->expr)) {
        const auto* put = std::get_if<PutReg>(&p[k]);
        if (call || (put != nullptr && put->reg == g->reg)) ok = false;
      }
      if (const auto* g = std::get_if<GetRegI>(&a->expr)) {
        const auto* put = std::get_if<PutRegI>(&p[k]);
        if (call || (put != nullptr && put->reg == g->reg)) ok = false;
      }
    }
    if (ok) found.emplace(*shape, a->tmp);
  }
  std::vector<AvailableExpr> out;
  for (const auto& [shape, tmp] : found) out.push_back({shape, tmp});
  return out;
}

TEST(AvailableExprs, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    PeepholeGenOptions opts;
    opts.tmp_pool = 3 + seed % 12;
    const auto p = gen_peephole(seed, 1 + seed % 60, opts);
    const auto av = available_exprs(p);
    ASSERT_EQ(av.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_EQ(av[i], brute_available(p, i)) << "seed " << seed << " stmt " << i;
    }
  }
}

// ---- passes -----------------------------------------------------------------

TEST(Normalize, LevelZeroIsIdentity) {
  const auto p = gen_peephole(11, 40);
  EXPECT_EQ(normalize_statements(p, NormLevel::N0), p);
}

TEST(Normalize, RedundantWrite) {
  EXPECT_EQ(normalized({"put(r16) = t0", "put(r16) = t1"}, NormLevel::N1),
            (std::vector<std::string>{"put(r16) = t1"}));
}

TEST(Normalize, RedundantWriteKeptAcrossRead) {
  EXPECT_EQ(normalized({"put(r16) = t0", "t5:INT = add(r16, 0x1:INT)", "put(r16) = t1", "put(r17) = t5"},
                       NormLevel::N1),
            (std::vector<std::string>{"put(r16) = t0", "t5:INT = add(r16, 0x1:INT)", "put(r16) = t1",
                                      "put(r17) = t5"}));
}

TEST(Normalize, RegisterPromotionForwardsPut) {
  EXPECT_EQ(normalized({"put(r16) = t0", "t1:INT = get(r16):INT", "store(M0) = t1"}, NormLevel::N1),
            (std::vector<std::string>{"put(r16) = t0", "store(M0) = t0"}));
}

TEST(Normalize, ConstantFoldThroughCopy) {
  EXPECT_EQ(normalized({"t1:INT = add(0x2:INT, 0x3:INT)", "t2:INT = t1", "store(M0) = t2"},
                       NormLevel::N2),
            (std::vector<std::string>{"store(M0) = 0x5:INT"}));
}

TEST(Normalize, ConstantsMoveRightOfCommutativeOps) {
  EXPECT_EQ(normalized({"t1:INT = 0x4:INT", "t2:INT = add(t1, t0)", "t3:INT = sub(t1, t0)", "put(r1) = t2",
                        "put(r2) = t3"},
                       NormLevel::N1),
            (std::vector<std::string>{"t2:INT = add(t0, 0x4:INT)", "t3:INT = sub(0x4:INT, t0)",
                                      "put(r1) = t2", "put(r2) = t3"}));
}

TEST(Normalize, RecomputationIntoSameTmpDisappears) {
  EXPECT_EQ(normalized({"t3:INT = sub(t0, 0x1:INT)", "put(r1) = t3", "t3:INT = sub(t0, 0x1:INT)",
                        "put(r2) = t3"},
                       NormLevel::N2),
            (std::vector<std::string>{"t3:INT = sub(t0, 0x1:INT)", "put(r1) = t3", "put(r2) = t3"}));
}

TEST(Normalize, DivisionByZeroIsNotFolded) {
  EXPECT_EQ(normalized({"t1:INT = div(0x2:INT, 0x0:INT)", "store(M0) = t1"}, NormLevel::N2),
            (std::vector<std::string>{"t1:INT = div(0x2:INT, 0x0:INT)", "store(M0) = t1"}));
}

TEST(Normalize, VectorOpsAreNotFolded) {
  EXPECT_EQ(normalized({"t1:VECTOR = addv(0x2:INT, 0x3:INT)", "store(M0) = t1"}, NormLevel::N2),
            (std::vector<std::string>{"t1:VECTOR = addv(0x2:INT, 0x3:INT)", "store(M0) = t1"}));
}

TEST(Normalize, RepeatedLoadReusesFirst) {
  EXPECT_EQ(normalized({"t0:INT = load(M3):INT", "t5:INT = add(t0, 0x1:INT)", "t9:INT = load(M3):INT",
                        "t10:INT = mul(t9, t5)", "put(r1) = t10"},
                       NormLevel::N2),
            (std::vector<std::string>{"t0:INT = load(M3):INT", "t5:INT = add(t0, 0x1:INT)",
                                      "t10:INT = mul(t0, t5)", "put(r1) = t10"}));
}

TEST(Normalize, LoadThenStoreBackIsDropped) {
  EXPECT_EQ(normalized({"t0:INT = load(M3):INT", "put(r1) = t0", "store(M3) = t0"}, NormLevel::N3),
            (std::vector<std::string>{"t0:INT = load(M3):INT", "put(r1) = t0"}));
  // A store to another symbolic cell in between does not matter; one through
  // a tmp address might alias.
  EXPECT_EQ(normalized({"t0:INT = load(M3):INT", "store(t7) = 0x1:INT", "store(M3) = t0"},
                       NormLevel::N3),
            (std::vector<std::string>{"t0:INT = load(M3):INT", "store(t7) = 0x1:INT",
                                      "store(M3) = t0"}));
}

TEST(Normalize, StoreStore) {
  EXPECT_EQ(normalized({"store(M1) = t0", "store(M1) = t1"}, NormLevel::N3),
            (std::vector<std::string>{"store(M1) = t1"}));
  EXPECT_EQ(normalized({"store(M1) = t0", "t2:INT = load(M2):INT", "store(M1) = t1", "put(r0) = t2"},
                       NormLevel::N3),
            (std::vector<std::string>{"store(M1) = t0", "t2:INT = load(M2):INT", "store(M1) = t1",
                                      "put(r0) = t2"}));
}

TEST(Normalize, DeadTempsOnlyAtN3) {
  const std::vector<std::string> in = {"t0:INT = get(r1):INT", "t1:INT = add(t0, 0x1:INT)"};
  EXPECT_EQ(normalized(in, NormLevel::N2), in);
  EXPECT_TRUE(normalized(in, NormLevel::N3).empty());
}

TEST(Normalize, CallsAreBarriersAndKept) {
  const std::vector<std::string> in = {"put(r1) = t0", "call ext \"f\"()", "t1:INT = get(r1):INT",
                                       "put(r1) = t1"};
  EXPECT_EQ(normalized(in, NormLevel::N3), in);
}

// ---- interpreter ------------------------------------------------------------

TEST(Evaluate, PutConstant) {
  const auto st = evaluate_peephole(stmts({"put(r5) = 0x7:INT"}), seeded_environment(1));
  ASSERT_EQ(st.registers.size(), 1u);
  EXPECT_EQ(st.registers.at(5), (OpValue{7, false}));
}

TEST(Evaluate, StoreOfSum) {
  const auto st = evaluate_peephole(stmts({"t0:INT = add(0x2:INT, 0x3:INT)", "store(M1) = t0"}),
                                    seeded_environment(1));
  ASSERT_EQ(st.memory.size(), 1u);
  EXPECT_EQ(st.memory.at(MemKey{true, 1}), (OpValue{5, false}));
}

TEST(Evaluate, ParametersComeFromEnvironment) {
  const Environment env = seeded_environment(42);
  const auto st = evaluate_peephole(stmts({"t0:INT = get(r3):INT", "t1:INT = load(M2):INT",
                                           "t2:INT = add(t0, t1)", "put(r4) = t2", "put(r5) = t9"}),
                                    env);
  EXPECT_EQ(st.registers.at(4).bits, env(LocKind::kReg, 3) + env(LocKind::kMem, 2));
  EXPECT_EQ(st.registers.at(5).bits, env(LocKind::kTmp, 9));
}

TEST(Evaluate, ConcreteAddressesShareCells) {
  const auto st = evaluate_peephole(stmts({"t0:INT = add(0x8:INT, 0x8:INT)", "store(t0) = 0x1:INT",
                                           "t1:INT = load(0x10:INT):INT", "put(r0) = t1"}),
                                    seeded_environment(3));
  EXPECT_EQ(st.registers.at(0).bits, 1u);
}

TEST(Evaluate, UnknownPoisonsOnlyObservables) {
  const Environment env = seeded_environment(5);
  const auto hidden = stmts({"t0:INT = unk(0x1:INT)", "put(r1) = 0x2:INT"});
  const auto a = evaluate_peephole(hidden, env);
  EXPECT_TRUE(a.tmps.at(0).opaque);
  EXPECT_TRUE(observables_equal(a, evaluate_peephole(hidden, env), env));
  const auto leaked = stmts({"t0:INT = unk(0x1:INT)", "put(r1) = t0"});
  const auto b = evaluate_peephole(leaked, env);
  EXPECT_FALSE(observables_equal(b, evaluate_peephole(leaked, env), env));
}

TEST(Evaluate, AbstractOperandsRejected) {
  EXPECT_THROW(evaluate_peephole(stmts({"put(r1) = VAR"}), seeded_environment(1)),
               std::invalid_argument);
}

TEST(Evaluate, WritingTheInitialValueIsUnobservable) {
  const Environment env = seeded_environment(8);
  const auto st = evaluate_peephole(stmts({"t0:INT = get(r2):INT", "put(r2) = t0"}), env);
  EXPECT_TRUE(observables_equal(st, evaluate_peephole(std::vector<Statement>{}, env), env));
}

// ---- properties -------------------------------------------------------------

constexpr NormLevel kLevels[] = {NormLevel::N1, NormLevel::N2, NormLevel::N3};

TEST(NormalizeProperties, ObservablesPreserved) {
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    const auto p = gen_peephole(seed, 1 + seed % 70);
    for (NormLevel level : kLevels) {
      const auto q = normalize_statements(p, level);
      for (std::uint64_t e = 0; e < 8; ++e) {
        const Environment env = seeded_environment(hash_combine(seed, e));
        ASSERT_TRUE(observables_equal(evaluate_peephole(p, env), evaluate_peephole(q, env), env))
            << "seed " << seed << " level " << norm_level_name(level);
      }
    }
  }
}

TEST(NormalizeProperties, IdempotentAndShrinking) {
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    const auto p = gen_peephole(seed, 1 + seed % 70);
    for (NormLevel level : kLevels) {
      int rounds = 0;
      const auto q = normalize_statements(p, level, OpcodeTable::builtin(), &rounds);
      EXPECT_LT(rounds, kMaxNormRounds) << seed;
      EXPECT_LE(q.size(), p.size());
      ASSERT_EQ(normalize_statements(q, level), q) << "seed " << seed;
    }
  }
}

TEST(NormalizeProperties, NoPassGrowsThePeephole) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto p = gen_peephole(seed, 1 + seed % 70);
    for (Pass pass : passes_for(NormLevel::N3)) {
      const std::size_t before = p.size();
      run_pass(pass, p);
      ASSERT_LE(p.size(), before) << pass_name(pass);
    }
  }
}

TEST(NormalizeProperties, CanonicalFunctionPeepholes) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const IrFunction f = canonicalize_function(gen_function(seed, 80, "g"));
    const PeepholeSet set = generate_peepholes(f, {16, 2, seed});
    for (const auto& p : set.peepholes) {
      for (NormLevel level : kLevels) {
        const Peephole q = normalize_peephole(p, level);
        EXPECT_EQ(q.block_ids, p.block_ids);
        const Environment env = seeded_environment(seed);
        ASSERT_TRUE(observables_equal(evaluate_peephole(p.statements, env),
                                      evaluate_peephole(q.statements, env), env));
      }
    }
  }
}

std::size_t token_diversity(const std::vector<IrFunction>& fs, NormLevel level) {
  std::set<std::string> unique;
  for (const auto& f : fs) {
    for (const auto& p : generate_peepholes(f, {72, 2, 1}).peepholes) {
      for (const auto& s : abstract_operands(normalize_peephole(p, level)).statements) {
        unique.insert(format_statement(s));
      }
    }
  }
  return unique.size();
}

TEST(NormalizeProperties, DiversityShrinksWithLevel) {
  std::vector<IrFunction> fs;
  for (const char* name : {"a.vexir", "fib.vexir", "loop4.vexir"}) {
    for (const auto& f : load_program(testing::fixture(name)).functions) fs.push_back(canonicalize_function(f));
  }
  std::size_t prev = token_diversity(fs, NormLevel::N0);
  for (NormLevel level : kLevels) {
    const std::size_t d = token_diversity(fs, level);
    EXPECT_LE(d, prev) << norm_level_name(level);
    prev = d;
  }
}

}  // namespace
}  // namespace peepvec
