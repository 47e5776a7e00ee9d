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

#ifndef PEEPVEC_SIMTASKS_HPP
#define PEEPVEC_SIMTASKS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "peepvec/tensor.hpp"

// Nearest-neighbor diffing and searching over function embeddings, and the
// retrieval metrics used to score them.
namespace peepvec {

struct Neighbor {
  std::size_t index = 0;  // insertion index in the index
  double distance = 0;    // Euclidean
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Squared Euclidean distance, summed in coordinate order.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Exact k-nearest-neighbor search with a KD-tree. Results are ordered by
// ascending distance, equal distances by ascending insertion index, which
// makes them identical to a linear scan computing the same distances.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  // Throws std::invalid_argument if ids and rows disagree.
  EmbeddingIndex(Matrix points, std::vector<std::string> ids);

  std::size_t size() const { return points_.rows; }
  std::size_t dim() const { return points_.cols; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::span<const double> point(std::size_t i) const { return points_.row(i); }

  // Throws std::invalid_argument if k > size() or the query has the wrong
  // dimension. skip (if < size()) is left out of the candidates.
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k, std::size_t skip = SIZE_MAX) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_ for leaves
    std::size_t axis = 0;
    double split = 0;
    int left = -1, right = -1;
  };
  int build(std::size_t begin, std::size_t end);
  void search(int node, std::span<const double> q, std::size_t k, std::size_t skip,
              std::vector<std::pair<double, std::size_t>>& heap) const;

  Matrix points_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

// A set of function embeddings. keys[i] names the source function that
// ids[i] was built from; equal keys across sets define the ground truth.
struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<std::string> keys;
  Matrix points;

  std::size_t size() const { return ids.size(); }
  // Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
};

struct Metrics {
  double precision = 0, recall = 0, f1 = 0;
};

// precision = tp/(tp+fp), recall = tp/(tp+fn), F1 their harmonic mean; each
// is 0 when its denominator is 0.
Metrics prf(std::size_t tp, std::size_t fp, std::size_t fn);

// (1/N) * sum over positions i of Prec(i) * Rel(i), N the number of relevant
// positions; 0 when nothing relevant was retrieved.
double average_precision(const std::vector<bool>& relevant);

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
  double map = 0;
  std::vector<double> ap;  // per query
};

struct RankedList {
  std::size_t query = 0;
  std::vector<Neighbor> neighbors;
  std::vector<bool> relevant;
};

enum class DiffMode { kTopK, kMatching };

struct DiffResult {
  EvalReport report;
  std::vector<RankedList> lists;  // one per source function
  // One-to-one (source, target) pairs, filled in matching mode.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::size_t correct_matches = 0;
};

// Matches every source function against the target set. A source whose
// ground-truth target is among its k nearest targets is a true positive;
// otherwise it is a false positive and a false negative. A ground-truth key
// present in only one of the sets is a false negative. Throws
// std::invalid_argument on an empty set or duplicate keys within a set.
DiffResult diff(const EmbeddingSet& source, const EmbeddingSet& target, std::size_t k = 10,
                DiffMode mode = DiffMode::kTopK, std::size_t workers = 1);

struct SearchResult {
  EvalReport report;
  std::vector<RankedList> lists;  // one per query
};

// Retrieves the k nearest pool entries for each query, skipping pool entries
// whose id equals the query's id. Relevant means same key. TP/FP/FN use the
// same query-level accounting as diff: a query with a relevant hit is a TP,
// one without is an FP and an FN, and a query with no relevant pool entry is
// an FN. Throws std::invalid_argument on an empty pool.
SearchResult search(const EmbeddingSet& pool, const EmbeddingSet& queries, std::size_t k = 10,
                    std::size_t workers = 1);

// Sorted F1 values with cumulative fractions.
std::vector<std::pair<double, double>> f1_cdf(std::span<const EvalReport> reports);
std::string format_f1_cdf(std::span<const std::pair<double, double>> table);

// query,rank,candidate,distance,relevant
std::string format_results(const EmbeddingSet& queries, const EmbeddingSet& candidates,
                           std::span<const RankedList> lists);
// JSON object with keys tp, fp, fn, precision, recall, f1, map in that order.
std::string format_report(const EvalReport& r);

}  // namespace peepvec

#endif  // PEEPVEC_SIMTASKS_HPP
