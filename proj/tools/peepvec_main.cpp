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

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "peepvec/canon.hpp"
#include "peepvec/cfg.hpp"
#include "peepvec/embedder.hpp"
#include "peepvec/parallel.hpp"
#include "peepvec/peephole.hpp"
#include "peepvec/pipeline.hpp"
#include "peepvec/simtasks.hpp"
#include "peepvec/synthgen.hpp"
#include "peepvec/text.hpp"
#include "peepvec/vexine.hpp"
#include "peepvec/vexnet.hpp"
#include "peepvec/vocab.hpp"

namespace fs = std::filesystem;
using namespace peepvec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// A bad input file or inconsistent inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint32_t k = 72;
  std::uint32_t c = 2;
  std::uint64_t seed = kDefaultSeed;
  std::string level = "N3";
  std::size_t workers = 1;
  std::size_t dim = kVocabDim;
  std::size_t context_dim = 180;
  std::size_t out_dim = 128;
  std::string vocab;
  std::string model;
  std::string groups;
  std::string out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw DataError("cannot write " + path);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

NormLevel level_of(const Options& o) { return *parse_norm_level(o.level); }

PeepholeConfig peephole_config(const Options& o) { return {o.k, o.c, o.seed}; }

std::map<std::string, std::string> load_groups(const std::string& path) {
  if (path.empty()) return {};
  return parse_groups(read_file(path));
}

std::vector<FunctionEmbedding> load_embedding_files(const std::vector<std::string>& paths) {
  std::vector<FunctionEmbedding> all;
  for (const auto& p : paths) {
    auto fsv = load_embeddings(p);
    all.insert(all.end(), std::make_move_iterator(fsv.begin()), std::make_move_iterator(fsv.end()));
  }
  return all;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".vexir") files.push_back(e.path().string());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(in);
    }
  }
  if (out.empty()) throw DataError("no .vexir inputs");
  return out;
}

// ---- subcommands -------------------------------------------------------------

int cmd_validate(const std::string& path) {
  ParseOptions lax;
  lax.check_invariants = false;
  const Program p = parse_program(read_file(path), lax);
  std::size_t problems = 0;
  for (const IrFunction& f : p.functions) {
    for (const Diagnostic& d : validate_cfg(f)) {
      std::cerr << path << ": " << f.name << ": bb " << d.block << ": " << issue_name(d.issue) << ": " << d.message
                << "\n";
      ++problems;
    }
  }
  if (problems > 0) return kExitData;
  parse_program(read_file(path));
  std::cout << "ok: " << p.functions.size() << " functions\n";
  return 0;
}

Program load_canonical(const std::string& path) {
  std::vector<CanonDiagnostic> diags;
  Program p = canonicalize_program(load_program(path), OpcodeTable::builtin(), &diags);
  for (const auto& d : diags) {
    std::cerr << "warning: " << path << ": " << d.function << ": bb " << d.block << ": unknown opcode " << d.opcode
              << "\n";
  }
  return p;
}

int cmd_canon(const Options& o, const std::string& path) {
  write_output(o.out, serialize_program(load_canonical(path)));
  return 0;
}

int cmd_peep(const Options& o, const std::string& path) {
  const Program p = load_program(path);
  std::string out;
  for (const IrFunction& f : p.functions) out += format_peep_dump(f.name, generate_peepholes(f, peephole_config(o)));
  write_output(o.out, out);
  return 0;
}

int cmd_norm(const Options& o, const std::string& path, bool abstract) {
  const Program p = load_canonical(path);
  std::string out;
  for (const IrFunction& f : p.functions) {
    for (const Peephole& raw : generate_peepholes(f, peephole_config(o)).peepholes) {
      Peephole n = normalize_peephole(raw, level_of(o));
      if (abstract) n = abstract_operands(n);
      out += "peephole " + quote_string(f.name);
      for (auto b : n.block_ids) out += " " + std::to_string(b);
      out += "\n";
      for (const Statement& s : n.statements) out += "  " + format_statement(s) + "\n";
    }
  }
  write_output(o.out, out);
  return 0;
}

int cmd_triplets(const Options& o, const std::vector<std::string>& inputs) {
  std::vector<Triplet> all;
  for (const auto& path : expand_inputs(inputs)) {
    const auto ts = program_triplets(load_canonical(path), peephole_config(o), level_of(o), o.workers);
    all.insert(all.end(), ts.begin(), ts.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::string out;
  for (const Triplet& t : all) out += format_triplet(t) + "\n";
  write_output(o.out, out);
  return 0;
}

struct PretrainFlags {
  std::size_t epochs = 100;
  double lr = 0.002;
  double margin = 3.0;
  std::size_t batch = 256;
  std::string history;
};

int cmd_pretrain(const Options& o, const std::string& triplet_path, const PretrainFlags& f) {
  require(o.out, "--out");
  std::vector<Triplet> triplets;
  try {
    triplets = parse_triplets(read_file(triplet_path));
  } catch (const std::runtime_error& e) {
    throw DataError(triplet_path + ": " + e.what());
  }
  if (triplets.empty()) throw DataError(triplet_path + ": no triplets");
  TransEConfig cfg;
  cfg.epochs = f.epochs;
  cfg.learning_rate = f.lr;
  cfg.margin = f.margin;
  cfg.batch_size = f.batch;
  cfg.dim = o.dim;
  cfg.seed = o.seed;
  const auto inventory = entity_inventory();
  const TransEResult r = train_transe(triplets, cfg, inventory);
  save_vocab(r.vocab, o.out);
  if (!f.history.empty()) {
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
      std::ostringstream line;
      line.precision(17);
      line << e + 1 << "," << r.epoch_loss[e] << "\n";
      csv += line.str();
    }
    write_output(f.history, csv);
  }
  std::cerr << "pretrained " << r.vocab.entity_count() << " entities on " << r.distinct_triplets
            << " distinct triplets; hits@10 " << hits_at(r.vocab, triplets, 10) << "\n";
  return 0;
}

int cmd_embed(const Options& o, const std::vector<std::string>& inputs) {
  require(o.vocab, "--vocab");
  require(o.out, "--out");
  const Vocabulary v = load_vocab(o.vocab);
  const auto files = expand_inputs(inputs);
  std::vector<std::vector<FunctionEmbedding>> per_file(files.size());
  // Files in parallel when there are several (task level), functions in
  // parallel inside a single file (thread level).
  const bool task_level = files.size() > 1;
  EmbedOptions eo;
  eo.peepholes = peephole_config(o);
  eo.level = level_of(o);
  eo.workers = task_level ? 1 : o.workers;
  parallel_for(files.size(), task_level ? o.workers : 1, [&](std::size_t i) {
    per_file[i] = embed_program(canonicalize_program(load_program(files[i])), v, eo, fs::path(files[i]).stem().string());
  });
  std::vector<FunctionEmbedding> all;
  for (auto& f : per_file) all.insert(all.end(), f.begin(), f.end());
  save_embeddings(all, o.out);
  std::cerr << "embedded " << all.size() << " functions from " << files.size() << " file(s)\n";
  return 0;
}

struct TrainFlags {
  std::size_t epochs = 30;
  std::size_t batch = 256;
  double lr = 1e-3;
  double decay = 0.817;
  double dropout = 0.02;
  double tau = 0.05;
  std::string history;
};

int cmd_train(const Options& o, const std::vector<std::string>& femb, const TrainFlags& f) {
  require(o.out, "--out");
  const auto embs = load_embedding_files(femb);
  if (embs.empty()) throw DataError("no functions to train on");
  const auto groups = load_groups(o.groups);
  VexNetConfig cfg;
  cfg.in_dims = {embs[0].O.size(), embs[0].T.size(), embs[0].A.size(), embs[0].S.size(), embs[0].L.size()};
  cfg.context_dim = o.context_dim;
  cfg.out_dim = o.out_dim;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.lr = f.lr;
  cfg.lr_decay = f.decay;
  cfg.dropout = f.dropout;
  cfg.temperature = f.tau;
  cfg.seed = o.seed;
  const auto labels = group_labels(embs, groups);
  TrainResult r;
  try {
    r = train(VexNetModel::init(cfg), network_inputs(embs), labels, cfg);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  save_model(r.model, o.out);
  if (!f.history.empty()) write_output(f.history, format_history(r.history));
  std::cerr << "trained on " << embs.size() << " functions; final loss "
            << (r.history.empty() ? 0.0 : r.history.back().loss) << "\n";
  if (r.collapse_warning) {
    std::cerr << "warning: embeddings collapsed (spread " << r.final_spread << " vs initial " << r.initial_spread
              << ")\n";
  }
  return 0;
}

struct RetrievalFlags {
  std::size_t k = 10;
  std::string results;
  std::string matches;
  std::string mode = "topk";
};

int cmd_diff(const Options& o, const std::string& source, const std::string& target, const RetrievalFlags& f) {
  require(o.model, "--model");
  const VexNetModel m = load_model(o.model);
  const auto groups = load_groups(o.groups);
  const auto src = load_embeddings(source);
  const auto tgt = load_embeddings(target);
  EmbeddingSet a, b;
  try {
    a = embedding_set(m, src, groups, o.workers);
    b = embedding_set(m, tgt, groups, o.workers);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  DiffResult r;
  try {
    r = diff(a, b, f.k, f.mode == "matching" ? DiffMode::kMatching : DiffMode::kTopK, o.workers);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  if (!f.results.empty()) write_output(f.results, format_results(a, b, r.lists));
  if (!f.matches.empty()) {
    std::string csv = "source,target,correct\n";
    for (const auto& [s, t] : r.matches) {
      csv += a.ids[s] + "," + b.ids[t] + (a.keys[s] == b.keys[t] ? ",1\n" : ",0\n");
    }
    write_output(f.matches, csv);
  }
  write_output(o.out, format_report(r.report));
  return 0;
}

int cmd_search(const Options& o, const std::vector<std::string>& pool_files, const std::string& queries,
               const RetrievalFlags& f) {
  require(o.model, "--model");
  const VexNetModel m = load_model(o.model);
  const auto groups = load_groups(o.groups);
  const auto pool_embs = load_embedding_files(pool_files);
  const auto query_embs = load_embeddings(queries);
  SearchResult r;
  EmbeddingSet pool, qs;
  try {
    pool = embedding_set(m, pool_embs, groups, o.workers);
    qs = embedding_set(m, query_embs, groups, o.workers);
    r = search(pool, qs, f.k, o.workers);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  if (!f.results.empty()) write_output(f.results, format_results(qs, pool, r.lists));
  write_output(o.out, format_report(r.report));
  return 0;
}

int cmd_eval(const Options& o, const std::vector<std::string>& reports) {
  std::vector<EvalReport> rs;
  for (const auto& path : reports) {
    EvalReport r;
    try {
      const auto j = nlohmann::json::parse(read_file(path));
      r.tp = j.at("tp").get<std::size_t>();
      r.fp = j.at("fp").get<std::size_t>();
      r.fn = j.at("fn").get<std::size_t>();
      r.precision = j.at("precision").get<double>();
      r.recall = j.at("recall").get<double>();
      r.f1 = j.at("f1").get<double>();
      r.map = j.at("map").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    rs.push_back(r);
  }
  write_output(o.out, format_f1_cdf(f1_cdf(rs)));
  return 0;
}

int cmd_synth(const Options& o, const std::string& corpus_cfg, const std::string& dir, bool seed_given) {
  CorpusConfig cfg;
  if (!corpus_cfg.empty()) {
    try {
      cfg = parse_corpus_config(read_file(corpus_cfg));
    } catch (const std::runtime_error& e) {
      throw DataError(corpus_cfg + ": " + e.what());
    }
  }
  if (seed_given) cfg.seed = o.seed;
  const Corpus corpus = make_corpus(cfg);
  write_corpus(corpus, dir);
  std::cerr << "wrote " << corpus.programs.size() << " variants of " << cfg.groups << " functions to " << dir << "\n";
  return 0;
}

int cmd_analogy(const Options& o, const std::string& path) {
  require(o.vocab, "--vocab");
  const Vocabulary v = load_vocab(o.vocab);
  std::vector<AnalogyQuery> queries;
  try {
    queries = parse_analogies(read_file(path));
  } catch (const std::runtime_error& e) {
    throw DataError(path + ": " + e.what());
  }
  AnalogyReport r;
  try {
    r = evaluate_analogies(v, queries);
  } catch (const std::out_of_range& e) {
    throw DataError(std::string("analogy references an unknown entity: ") + e.what());
  }
  std::ostringstream out;
  for (const auto& res : r.results) {
    out << res.query.a << " " << res.query.b << " " << res.query.c << " -> " << res.answer << " (expected "
        << res.query.expected << ") " << (res.correct ? "ok" : "miss") << "\n";
  }
  out << "accuracy: " << r.accuracy() << " (" << r.correct << "/" << r.results.size() << ")\n";
  write_output(o.out, out.str());
  return 0;
}

int cmd_bench(const Options& o, const std::vector<std::string>& inputs, const std::vector<std::size_t>& workers,
              std::size_t repeat) {
  const auto files = expand_inputs(inputs);
  std::vector<Program> programs;
  for (const auto& f : files) programs.push_back(load_program(f));
  Vocabulary v;
  if (o.vocab.empty()) {
    v = Vocabulary(o.dim, entity_inventory());
    Rng rng(o.seed);
    for (double& x : v.entity_data()) x = rng.uniform(-1, 1);
  } else {
    v = load_vocab(o.vocab);
  }
  std::size_t functions = 0;
  for (const auto& p : programs) functions += p.functions.size();
  EmbedOptions eo;
  eo.peepholes = peephole_config(o);
  eo.level = level_of(o);
  std::string csv = "workers,functions,canonicalize_s,embed_s,speedup\n";
  double base = 0;
  for (std::size_t w : workers) {
    double best_canon = 0, best_embed = 0, best_total = 0;
    for (std::size_t rep = 0; rep < std::max<std::size_t>(repeat, 1); ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<Program> canon(programs.size());
      for (std::size_t i = 0; i < programs.size(); ++i) canon[i] = canonicalize_program(programs[i]);
      const auto t1 = std::chrono::steady_clock::now();
      eo.workers = w;
      for (const auto& p : canon) embed_program(p, v, eo);
      const auto t2 = std::chrono::steady_clock::now();
      const double c = std::chrono::duration<double>(t1 - t0).count();
      const double t = std::chrono::duration<double>(t2 - t0).count();
      if (rep == 0 || t < best_total) {
        best_total = t;
        best_canon = c;
        best_embed = t - c;
      }
    }
    if (base == 0) base = best_total;
    std::ostringstream line;
    line << w << "," << functions << "," << best_canon << "," << best_embed << "," << base / best_total << "\n";
    csv += line.str();
  }
  write_output(o.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"peepvec: function embeddings from VEX-like IR for binary diffing and search"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value run configuration (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Options o;
  auto* seed_opt = app.add_option("--seed", o.seed, "seed for every randomized stage (default 0xC0FFEE, or PEEPVEC_SEED)");
  app.add_option("--k", o.k, "maximum blocks per peephole")->check(CLI::PositiveNumber);
  app.add_option("--c", o.c, "minimum walks through each block")->check(CLI::PositiveNumber);
  app.add_option("--level", o.level, "normalization level")->check(CLI::IsMember({"N0", "N1", "N2", "N3"}));
  app.add_option("--workers", o.workers, "worker threads (0 = all cores)");
  app.add_option("--dim", o.dim, "vocabulary dimension")->check(CLI::PositiveNumber);
  app.add_option("--context-dim", o.context_dim, "attention context dimension")->check(CLI::PositiveNumber);
  app.add_option("--out-dim", o.out_dim, "final embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--vocab", o.vocab, "vocabulary file");
  app.add_option("--model", o.model, "model file");
  app.add_option("--groups", o.groups, "groups.tsv mapping function names to ground-truth keys");
  app.add_option("-o,--out", o.out, "output path (default stdout)");

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  std::string input, second;
  std::vector<std::string> inputs;
  bool abstract = false;
  PretrainFlags pf;
  TrainFlags tf;
  RetrievalFlags rf;
  std::string corpus_cfg;
  std::vector<std::size_t> bench_workers{1, 2, 4};
  std::size_t repeat = 1;

  auto* validate = sub("validate", "parse a .vexir file and check every CFG invariant");
  validate->add_option("file", input)->required();
  auto* canon = sub("canon", "canonicalize a .vexir program");
  canon->add_option("file", input)->required();
  auto* peep = sub("peep", "dump the peephole walks of every function");
  peep->add_option("file", input)->required();
  auto* norm = sub("norm", "print normalized peepholes");
  norm->add_option("file", input)->required();
  norm->add_flag("--abstract", abstract, "abstract operands to VAR/CONST/REG/MEM/FUNC");
  auto* triplets = sub("triplets", "extract distinct triplets from .vexir files or directories");
  triplets->add_option("inputs", inputs)->required();
  auto* pretrain = sub("pretrain", "train the entity vocabulary with TransE");
  pretrain->add_option("triplets", input)->required();
  pretrain->add_option("--epochs", pf.epochs);
  pretrain->add_option("--lr", pf.lr);
  pretrain->add_option("--margin", pf.margin);
  pretrain->add_option("--batch", pf.batch);
  pretrain->add_option("--history", pf.history, "per-epoch loss CSV");
  auto* embed = sub("embed", "embed every function of .vexir files or directories");
  embed->add_option("inputs", inputs)->required();
  auto* trn = sub("train", "train the fine-tuning network on .femb files");
  trn->add_option("femb", inputs)->required();
  trn->add_option("--epochs", tf.epochs);
  trn->add_option("--batch", tf.batch);
  trn->add_option("--lr", tf.lr);
  trn->add_option("--decay", tf.decay, "learning-rate factor per epoch");
  trn->add_option("--dropout", tf.dropout);
  trn->add_option("--tau", tf.tau, "NT-Xent temperature");
  trn->add_option("--history", tf.history, "epoch,loss,lr CSV");
  auto* dif = sub("diff", "match the functions of one .femb file against another");
  dif->add_option("source", input)->required();
  dif->add_option("target", second)->required();
  dif->add_option("--k", rf.k, "neighbors per source function");
  dif->add_option("--mode", rf.mode)->check(CLI::IsMember({"topk", "matching"}));
  dif->add_option("--results", rf.results, "ranked neighbor CSV");
  dif->add_option("--matches", rf.matches, "one-to-one matching CSV (matching mode)");
  auto* srch = sub("search", "retrieve matches for query functions from a pool");
  srch->add_option("queries", input)->required();
  srch->add_option("pool", inputs)->required();
  srch->add_option("--k", rf.k, "neighbors per query");
  srch->add_option("--results", rf.results, "ranked neighbor CSV");
  auto* evl = sub("eval", "F1 CDF table from report files");
  evl->add_option("reports", inputs)->required();
  auto* synth = sub("synth", "generate a synthetic corpus of function variants");
  synth->add_option("--corpus", corpus_cfg, "corpus configuration file");
  synth->add_option("dir", input)->required();
  auto* analogy = sub("analogy", "answer analogy queries against a vocabulary");
  analogy->add_option("file", input)->required();
  auto* bench = sub("bench", "time embedding generation for several worker counts");
  bench->add_option("inputs", inputs)->required();
  bench->add_option("--workers", bench_workers, "worker counts to time")->delimiter(',');
  bench->add_option("--repeat", repeat, "runs per worker count (fastest is kept)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const bool seed_given = seed_opt->count() > 0;
  if (!seed_given) {
    if (const char* env = std::getenv("PEEPVEC_SEED")) {
      try {
        o.seed = std::stoull(env, nullptr, 0);
      } catch (const std::exception&) {
        std::cerr << "peepvec: error: PEEPVEC_SEED is not an integer: " << env << "\n";
        return kExitUsage;
      }
    }
  }

  try {
    if (*validate) return cmd_validate(input);
    if (*canon) return cmd_canon(o, input);
    if (*peep) return cmd_peep(o, input);
    if (*norm) return cmd_norm(o, input, abstract);
    if (*triplets) return cmd_triplets(o, inputs);
    if (*pretrain) return cmd_pretrain(o, input, pf);
    if (*embed) return cmd_embed(o, inputs);
    if (*trn) return cmd_train(o, inputs, tf);
    if (*dif) return cmd_diff(o, input, second, rf);
    if (*srch) return cmd_search(o, inputs, input, rf);
    if (*evl) return cmd_eval(o, inputs);
    if (*synth) return cmd_synth(o, corpus_cfg, input, seed_given || std::getenv("PEEPVEC_SEED") != nullptr);
    if (*analogy) return cmd_analogy(o, input);
    if (*bench) return cmd_bench(o, inputs, bench_workers, repeat);
  } catch (const CLI::RequiredError& e) {
    std::cerr << "peepvec: error: " << e.what() << " is required\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const VocabError& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const ModelError& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::runtime_error& e) {
    std::cerr << "peepvec: error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "peepvec: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
