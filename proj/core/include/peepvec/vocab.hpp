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

#ifndef PEEPVEC_VOCAB_HPP
#define PEEPVEC_VOCAB_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "peepvec/ir.hpp"
#include "peepvec/opcodes.hpp"
#include "peepvec/peephole.hpp"
#include "peepvec/rng.hpp"

// Knowledge-graph view of peepholes and the TransE entity vocabulary.
namespace peepvec {

enum class Relation : std::uint8_t { kType, kNext, kArg1, kArg2, kArg3, kArg4, kArg5, kArg6, kArg7, kArg8 };

inline constexpr std::size_t kRelationCount = 10;
inline constexpr std::size_t kMaxArgRelations = 8;
inline constexpr std::size_t kVocabDim = 128;

std::string_view relation_name(Relation r);
std::optional<Relation> parse_relation(std::string_view s);
Relation arg_relation(std::size_t index);  // 0 -> ARG1

struct Triplet {
  std::string head;
  Relation relation = Relation::kType;
  std::string tail;
  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

// Sorted, closed entity inventory: canonical opcodes, the data-movement
// pseudo-opcodes, the four type classes and the five abstract tokens.
std::vector<std::string> entity_inventory(const OpcodeTable& table = OpcodeTable::builtin());

// Pseudo-opcodes for statements that are not operations.
inline constexpr std::string_view kDataMovementOpcodes[] = {"call", "get", "geti", "load",
                                                            "mov",  "put", "puti", "store"};

// One statement seen as entities: its opcode, its type class (absent for
// calls without a result) and one abstract token per argument.
struct InstructionEntities {
  std::string opcode;
  std::optional<IrType> type;
  std::vector<AbstractToken> args;
  friend bool operator==(const InstructionEntities&, const InstructionEntities&) = default;
};

AbstractToken abstract_token(const Operand& o);

// Decomposes a statement sequence. Tmp operand types are taken from their
// definition earlier in the sequence; undefined tmps and VAR read as INT,
// float constants as DOUBLE. Opcodes outside the table map to unk and cast
// to mov.
std::vector<InstructionEntities> decompose(std::span<const Statement> stmts,
                                           const OpcodeTable& table = OpcodeTable::builtin());

std::vector<Triplet> extract_triplets(std::span<const Statement> stmts,
                                      const OpcodeTable& table = OpcodeTable::builtin());
std::vector<Triplet> extract_triplets(const Peephole& p,
                                      const OpcodeTable& table = OpcodeTable::builtin());

std::string format_triplet(const Triplet& t);  // "head<TAB>REL<TAB>tail"
// One triplet per non-empty line in format_triplet's layout. Throws
// std::runtime_error naming the line for malformed lines or unknown relations.
std::vector<Triplet> parse_triplets(std::string_view text);

// Entity and relation vectors. Entities are stored row-major in the order
// given at construction; relations in enum order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::size_t dim, std::vector<std::string> entity_names);

  std::size_t dim() const { return dim_; }
  std::size_t entity_count() const { return names_.size(); }
  const std::vector<std::string>& entity_names() const { return names_; }

  std::optional<std::size_t> find_entity(std::string_view name) const;
  // Throws std::out_of_range for unknown names.
  std::span<const double> entity(std::string_view name) const;
  std::span<const double> entity(std::size_t index) const;
  std::span<double> entity(std::size_t index);
  std::span<const double> relation(Relation r) const;
  std::span<double> relation(Relation r);

  std::vector<double>& entity_data() { return entities_; }
  const std::vector<double>& entity_data() const { return entities_; }
  std::vector<double>& relation_data() { return relations_; }
  const std::vector<double>& relation_data() const { return relations_; }

  std::map<std::string, std::string> meta;

  friend bool operator==(const Vocabulary&, const Vocabulary&);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

// ---- TransE --------------------------------------------------------------

struct TransEConfig {
  double margin = 3.0;
  double learning_rate = 0.002;
  std::size_t batch_size = 256;
  std::size_t epochs = 100;
  std::size_t dim = kVocabDim;
  std::uint64_t seed = kDefaultSeed;
};

struct IndexedTriplet {
  std::uint32_t head = 0;
  std::uint32_t relation = 0;
  std::uint32_t tail = 0;
  friend bool operator==(const IndexedTriplet&, const IndexedTriplet&) = default;
};

// Mean margin ranking loss over aligned positive/negative pairs with squared
// L2 energy. When grad is non-null it receives d(loss)/d(parameter) with the
// same layout as v (it is resized and overwritten).
double transe_loss(const Vocabulary& v, std::span<const IndexedTriplet> positives,
                   std::span<const IndexedTriplet> negatives, double margin, Vocabulary* grad = nullptr);

double transe_energy(const Vocabulary& v, const IndexedTriplet& t);

struct TransEResult {
  Vocabulary vocab;
  std::vector<double> epoch_loss;  // mean loss per distinct triplet
  std::size_t distinct_triplets = 0;
};

// Trains on the distinct triplets of the stream. Every name in entities is
// given a vector even if no triplet mentions it. Throws std::invalid_argument
// for an empty stream or a non-positive margin or learning rate.
TransEResult train_transe(std::span<const Triplet> triplets, const TransEConfig& cfg,
                          std::span<const std::string> entities = {});

// Fraction of triplets whose true tail ranks within the top k of all
// entities by energy (ties count against the true tail).
double hits_at(const Vocabulary& v, std::span<const Triplet> triplets, std::size_t k);

// ---- analogies -----------------------------------------------------------

struct AnalogyQuery {
  std::string a, b, c, expected;
  friend bool operator==(const AnalogyQuery&, const AnalogyQuery&) = default;
};

// Lines "a b c expected"; '#' starts a comment. Throws std::runtime_error
// with the line number on lines without four fields.
std::vector<AnalogyQuery> parse_analogies(std::string_view text);

// Entity closest to b - a + c by Euclidean distance, excluding a, b and c;
// ties go to the lexicographically smallest name. Throws std::out_of_range
// for unknown entities.
std::string answer_analogy(const Vocabulary& v, std::string_view a, std::string_view b, std::string_view c);

struct AnalogyResult {
  AnalogyQuery query;
  std::string answer;
  bool correct = false;
};

struct AnalogyReport {
  std::vector<AnalogyResult> results;
  std::size_t correct = 0;
  double accuracy() const { return results.empty() ? 0.0 : double(correct) / double(results.size()); }
};

AnalogyReport evaluate_analogies(const Vocabulary& v, std::span<const AnalogyQuery> queries);

// ---- persistence ---------------------------------------------------------

class VocabError : public std::runtime_error {
 public:
  VocabError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// "peepvec-vocab v1 dim=N", then "M key value", "E name x1..xN" and
// "R name x1..xN" lines; 17 significant digits.
std::string format_vocab(const Vocabulary& v);
Vocabulary parse_vocab(std::string_view text);
void save_vocab(const Vocabulary& v, const std::string& path);
Vocabulary load_vocab(const std::string& path);

}  // namespace peepvec

#endif  // PEEPVEC_VOCAB_HPP
