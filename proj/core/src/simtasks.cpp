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

#include "peepvec/simtasks.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "peepvec/parallel.hpp"

namespace peepvec {

namespace {

constexpr std::size_t kLeafSize = 16;

void append_number(std::string& out, double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Heap order: larger (distance, index) on top.
bool heap_less(const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) { return a < b; }

std::map<std::string, std::size_t> key_positions(const EmbeddingSet& s, const char* what) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < s.keys.size(); ++i) {
    if (!out.emplace(s.keys[i], i).second) {
      throw std::invalid_argument(std::string(what) + " set has more than one function for key '" + s.keys[i] + "'");
    }
  }
  return out;
}

void finish(EvalReport& r) {
  const Metrics m = prf(r.tp, r.fp, r.fn);
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.map = r.ap.empty() ? 0.0 : std::accumulate(r.ap.begin(), r.ap.end(), 0.0) / static_cast<double>(r.ap.size());
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

EmbeddingIndex::EmbeddingIndex(Matrix points, std::vector<std::string> ids)
    : points_(std::move(points)), ids_(std::move(ids)) {
  if (ids_.size() != points_.rows) throw std::invalid_argument("index needs one id per point");
  order_.resize(points_.rows);
  std::iota(order_.begin(), order_.end(), 0);
  if (!order_.empty()) build(0, order_.size());
}

int EmbeddingIndex::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, 0, 0, -1, -1});
  if (end - begin <= kLeafSize) return id;
  // Split on the axis of largest spread at the median.
  std::size_t axis = 0;
  double best = -1;
  for (std::size_t d = 0; d < points_.cols; ++d) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, points_(order_[i], d));
      hi = std::max(hi, points_(order_[i], d));
    }
    if (hi - lo > best) {
      best = hi - lo;
      axis = d;
    }
  }
  if (best <= 0) return id;
  const std::size_t mid = begin + (end - begin) / 2;
  const auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
  std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return std::pair{points_(a, axis), a} < std::pair{points_(b, axis), b};
                   });
  const double split = points_(order_[mid], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void EmbeddingIndex::search(int node, std::span<const double> q, std::size_t k, std::size_t skip,
                            std::vector<std::pair<double, std::size_t>>& heap) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const std::size_t p = order_[i];
      if (p == skip) continue;
      const std::pair<double, std::size_t> cand{squared_distance(q, points_.row(p)), p};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_less);
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_less);
      }
    }
    return;
  }
  // Points left of the split have coordinate <= split, right ones >= split.
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, k, skip, heap);
  // Every point across the plane is at least diff^2 away, and the computed
  // sums of squares respect that bound, so pruning only on a strict excess
  // keeps equal-distance candidates for the index tie-break.
  if (heap.size() < k || diff * diff <= heap.front().first) search(far, q, k, skip, heap);
}

std::vector<Neighbor> EmbeddingIndex::knn(std::span<const double> query, std::size_t k, std::size_t skip) const {
  const std::size_t available = size() - (skip < size() ? 1 : 0);
  if (k > available) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " + std::to_string(available) +
                                " indexed points");
  }
  if (query.size() != dim()) throw std::invalid_argument("query dimension does not match the index");
  std::vector<Neighbor> out;
  if (k == 0) return out;
  std::vector<std::pair<double, std::size_t>> heap;
  heap.reserve(k + 1);
  search(0, query, k, skip, heap);
  std::sort_heap(heap.begin(), heap.end(), heap_less);
  for (const auto& [d2, i] : heap) out.push_back({i, std::sqrt(d2)});
  return out;
}

void EmbeddingSet::validate() const {
  if (keys.size() != ids.size() || points.rows != ids.size()) {
    throw std::invalid_argument("embedding set needs one key and one point per id");
  }
}

Metrics prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  Metrics m;
  const auto t = static_cast<double>(tp);
  if (tp + fp > 0) m.precision = t / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = t / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double average_precision(const std::vector<bool>& relevant) {
  double sum = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < relevant.size(); ++i) {
    if (!relevant[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

DiffResult diff(const EmbeddingSet& source, const EmbeddingSet& target, std::size_t k, DiffMode mode,
                std::size_t workers) {
  source.validate();
  target.validate();
  if (source.size() == 0 || target.size() == 0) throw std::invalid_argument("diffing needs two non-empty sets");
  if (source.points.cols != target.points.cols) throw std::invalid_argument("source and target dimensions differ");
  const auto source_keys = key_positions(source, "source");
  const auto target_keys = key_positions(target, "target");
  const EmbeddingIndex index(target.points, target.ids);
  const std::size_t kk = std::min(k, target.size());

  DiffResult r;
  r.lists.resize(source.size());
  parallel_for(source.size(), workers, [&](std::size_t s) {
    RankedList& l = r.lists[s];
    l.query = s;
    l.neighbors = index.knn(source.points.row(s), kk);
    for (const Neighbor& n : l.neighbors) l.relevant.push_back(target.keys[n.index] == source.keys[s]);
  });
  for (std::size_t s = 0; s < source.size(); ++s) {
    if (!target_keys.contains(source.keys[s])) {
      ++r.report.fn;
      continue;
    }
    const auto& rel = r.lists[s].relevant;
    if (std::find(rel.begin(), rel.end(), true) != rel.end()) {
      ++r.report.tp;
    } else {
      ++r.report.fp;
      ++r.report.fn;
    }
    r.report.ap.push_back(average_precision(rel));
  }
  for (const auto& [key, t] : target_keys) {
    if (!source_keys.contains(key)) ++r.report.fn;
  }
  finish(r.report);

  if (mode == DiffMode::kMatching) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(source.size() * target.size());
    for (std::size_t s = 0; s < source.size(); ++s) {
      for (std::size_t t = 0; t < target.size(); ++t) {
        pairs.emplace_back(squared_distance(source.points.row(s), target.points.row(t)), s, t);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_s(source.size()), used_t(target.size());
    for (const auto& [d, s, t] : pairs) {
      if (used_s[s] || used_t[t]) continue;
      used_s[s] = used_t[t] = true;
      r.matches.emplace_back(s, t);
      r.correct_matches += source.keys[s] == target.keys[t];
      if (r.matches.size() == std::min(source.size(), target.size())) break;
    }
    std::sort(r.matches.begin(), r.matches.end());
  }
  return r;
}

SearchResult search(const EmbeddingSet& pool, const EmbeddingSet& queries, std::size_t k, std::size_t workers) {
  pool.validate();
  queries.validate();
  if (pool.size() == 0) throw std::invalid_argument("search needs a non-empty pool");
  if (pool.points.cols != queries.points.cols) throw std::invalid_argument("pool and query dimensions differ");
  std::map<std::string, std::size_t> pool_id;
  std::map<std::string, std::size_t> key_count;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool_id.emplace(pool.ids[i], i);
    ++key_count[pool.keys[i]];
  }
  const EmbeddingIndex index(pool.points, pool.ids);

  SearchResult r;
  r.lists.resize(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t q) {
    auto it = pool_id.find(queries.ids[q]);
    const std::size_t skip = it == pool_id.end() ? SIZE_MAX : it->second;
    const std::size_t available = pool.size() - (skip == SIZE_MAX ? 0 : 1);
    RankedList& l = r.lists[q];
    l.query = q;
    l.neighbors = index.knn(queries.points.row(q), std::min(k, available), skip);
    for (const Neighbor& n : l.neighbors) l.relevant.push_back(pool.keys[n.index] == queries.keys[q]);
  });
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto it = pool_id.find(queries.ids[q]);
    std::size_t relevant_in_pool = key_count.contains(queries.keys[q]) ? key_count[queries.keys[q]] : 0;
    if (it != pool_id.end() && pool.keys[it->second] == queries.keys[q]) --relevant_in_pool;
    const auto& rel = r.lists[q].relevant;
    r.report.ap.push_back(average_precision(rel));
    if (relevant_in_pool == 0) {
      ++r.report.fn;
    } else if (std::find(rel.begin(), rel.end(), true) != rel.end()) {
      ++r.report.tp;
    } else {
      ++r.report.fp;
      ++r.report.fn;
    }
  }
  finish(r.report);
  return r;
}

std::vector<std::pair<double, double>> f1_cdf(std::span<const EvalReport> reports) {
  std::vector<double> f1s;
  for (const EvalReport& r : reports) f1s.push_back(r.f1);
  std::sort(f1s.begin(), f1s.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < f1s.size(); ++i) {
    out.emplace_back(f1s[i], static_cast<double>(i + 1) / static_cast<double>(f1s.size()));
  }
  return out;
}

std::string format_f1_cdf(std::span<const std::pair<double, double>> table) {
  std::string out = "f1,cumulative\n";
  for (const auto& [f1, cum] : table) {
    append_number(out, f1);
    out += ',';
    append_number(out, cum);
    out += '\n';
  }
  return out;
}

std::string format_results(const EmbeddingSet& queries, const EmbeddingSet& candidates,
                           std::span<const RankedList> lists) {
  std::string out = "query,rank,candidate,distance,relevant\n";
  for (const RankedList& l : lists) {
    for (std::size_t i = 0; i < l.neighbors.size(); ++i) {
      out += csv_field(queries.ids[l.query]);
      out += ',' + std::to_string(i + 1) + ',';
      out += csv_field(candidates.ids[l.neighbors[i].index]);
      out += ',';
      append_number(out, l.neighbors[i].distance);
      out += l.relevant[i] ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string format_report(const EvalReport& r) {
  std::string out = "{\n";
  out += "  \"tp\": " + std::to_string(r.tp) + ",\n";
  out += "  \"fp\": " + std::to_string(r.fp) + ",\n";
  out += "  \"fn\": " + std::to_string(r.fn) + ",\n";
  const std::pair<const char*, double> reals[] = {
      {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}, {"map", r.map}};
  for (std::size_t i = 0; i < 4; ++i) {
    out += "  \"";
    out += reals[i].first;
    out += "\": ";
    append_number(out, reals[i].second);
    out += i + 1 < 4 ? ",\n" : "\n";
  }
  return out + "}\n";
}

}  // namespace peepvec
