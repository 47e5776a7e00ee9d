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
#include <filesystem>
#include <fstream>
#include <set>

#include "peepvec/canon.hpp"
#include "peepvec/cfg.hpp"
#include "peepvec/synthgen.hpp"
#include "peepvec/text.hpp"
#include "peepvec/vexine.hpp"
#include "test_util.hpp"

namespace peepvec {
namespace {

TEST(GenFunction, SizeOne) {
  const IrFunction f = gen_function(1, 1);
  ASSERT_EQ(f.blocks.size(), 1u);
  EXPECT_EQ(f.statement_count(), 1u);
}

TEST(GenFunction, ValidExactSizeAndSsa) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const std::size_t size = 1 + seed % 200;
    const IrFunction f = gen_function(seed, size);
    EXPECT_EQ(f.statement_count(), size);
    ASSERT_TRUE(validate_cfg(f).empty()) << seed;
  }
}

TEST(GenFunction, EdgeRatioNearSparseCfgs) {
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const IrFunction f = gen_function(seed, 100);
    sum += static_cast<double>(edge_count(f)) / static_cast<double>(f.blocks.size());
  }
  const double mean = sum / 1000;
  EXPECT_GE(mean, 1.2);
  EXPECT_LE(mean, 1.5);
}

TEST(GenFunction, SeedsGiveDistinctFunctions) {
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Program p;
    p.functions.push_back(gen_function(seed, 40));
    seen.insert(serialize_program(p));
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(MakeVariant, NoneProfileIsIdentity) {
  const IrFunction f = gen_function(4, 90, "f");
  EXPECT_EQ(make_variant(f, VariationProfile::none(), 77), f);
}

TEST(MakeVariant, RenamesVanishUnderAbstraction) {
  VariationProfile p;
  p.rename_tmps = true;
  p.rename_regs = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const IrFunction f = gen_function(seed, 60, "f");
    const IrFunction v = make_variant(f, p, seed + 1);
    EXPECT_NE(v, f);
    const IrFunction cf = canonicalize_function(f);
    const IrFunction cv = canonicalize_function(v);
    ASSERT_EQ(cf.blocks.size(), cv.blocks.size());
    for (std::size_t b = 0; b < cf.blocks.size(); ++b) {
      EXPECT_EQ(abstract_operands(make_peephole(cf, {cf.blocks[b].id})),
                abstract_operands(make_peephole(cv, {cv.blocks[b].id})));
    }
  }
}

TEST(MakeVariant, BlocksKeepTheirObservables) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const IrFunction f = gen_function(seed, 20 + seed % 150, "f");
    VariantInfo info;
    const IrFunction v = make_variant(f, VariationProfile::full(), seed * 31 + 7, &info);
    ASSERT_TRUE(validate_cfg(v).empty());
    EXPECT_EQ(v.strings, f.strings);
    EXPECT_EQ(v.extern_calls, f.extern_calls);
    std::map<std::uint32_t, std::uint32_t> back;
    for (const auto& [from, to] : info.reg_map) back[to] = from;
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
      std::vector<Statement> joined;
      for (auto id : info.block_map[b]) {
        const auto& s = v.blocks.at(id).statements;
        joined.insert(joined.end(), s.begin(), s.end());
      }
      for (std::uint64_t e = 0; e < 4; ++e) {
        const Environment env = seeded_environment(e);
        // The variant reads register back[r] where the base read r.
        const Environment renamed = [&](LocKind k, std::uint64_t id) {
          if (k == LocKind::kReg || k == LocKind::kRegI) {
            return env(k, back.count(static_cast<std::uint32_t>(id)) ? back.at(static_cast<std::uint32_t>(id)) : id);
          }
          return env(k, id);
        };
        MachineState want = evaluate_peephole(f.blocks[b].statements, env);
        MachineState got = evaluate_peephole(joined, renamed);
        MachineState mapped;
        mapped.memory = got.memory;
        for (const auto& [r, val] : got.registers) mapped.registers[back.at(r)] = val;
        for (const auto& [r, val] : got.indexed) mapped.indexed[back.at(r)] = val;
        ASSERT_TRUE(observables_equal(want, mapped, env)) << "seed " << seed << " block " << b;
      }
    }
  }
}

TEST(MakeVariant, RejectsBadRates) {
  VariationProfile p;
  p.junk = 1.5;
  EXPECT_THROW(make_variant(gen_function(1, 10), p, 1), std::invalid_argument);
}

TEST(Corpus, GroupsAndCallsResolve) {
  CorpusConfig cfg;
  cfg.groups = 30;
  cfg.variants = 3;
  cfg.min_size = 10;
  cfg.max_size = 40;
  cfg.internal_call_rate = 0.5;
  const Corpus c = make_corpus(cfg);
  ASSERT_EQ(c.programs.size(), 3u);
  EXPECT_EQ(c.groups.size(), 90u);
  for (const auto& p : c.programs) {
    ASSERT_EQ(p.functions.size(), 30u);
    // Parsing checks that every internal call resolves.
    EXPECT_EQ(parse_program(serialize_program(p)), p);
  }
  EXPECT_EQ(c.groups[31], (std::pair<std::string, std::string>{"g0001_v1", "g0001"}));
  EXPECT_EQ(make_corpus(cfg).programs, c.programs);
}

TEST(Corpus, ConfigFile) {
  const CorpusConfig cfg = parse_corpus_config("groups = 7\nvariants=2 # two\nseed = 0x10\nreorder = 0.25\n");
  EXPECT_EQ(cfg.groups, 7u);
  EXPECT_EQ(cfg.variants, 2u);
  EXPECT_EQ(cfg.seed, 16u);
  EXPECT_EQ(cfg.profile.reorder, 0.25);
  EXPECT_THROW(parse_corpus_config("colour = red\n"), std::runtime_error);
  EXPECT_THROW(parse_corpus_config("groups = many\n"), std::runtime_error);
  const std::string shipped = [] {
    std::ifstream in(testing::fixture("corpus.cfg"));
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  EXPECT_EQ(parse_corpus_config(shipped).groups, 200u);
}

TEST(Corpus, GroupsFileRoundTrip) {
  const std::vector<std::pair<std::string, std::string>> g = {{"a_v0", "a"}, {"b_v0", "b"}};
  const auto parsed = parse_groups(format_groups(g));
  EXPECT_EQ(parsed.at("a_v0"), "a");
  EXPECT_EQ(parsed.size(), 2u);
  EXPECT_THROW(parse_groups("nogroup\n"), std::runtime_error);
}

TEST(Corpus, WritesFiles) {
  CorpusConfig cfg;
  cfg.groups = 3;
  cfg.variants = 2;
  const auto dir = std::filesystem::temp_directory_path() / "peepvec_corpus_test";
  std::filesystem::remove_all(dir);
  write_corpus(make_corpus(cfg), dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "variant_1.vexir"));
  EXPECT_EQ(load_program((dir / "variant_0.vexir").string()).functions.size(), 3u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace peepvec
