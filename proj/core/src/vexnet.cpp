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

#include "peepvec/vexnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "peepvec/parallel.hpp"

namespace peepvec {

namespace {

const std::array<std::string_view, kChannels> kChannelNames = {"O", "T", "A", "S", "L"};

void fill_uniform(Matrix& m, Rng rng, double bound) {
  for (double& x : m.data) x = rng.uniform(-bound, bound);
}

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

struct Graph {
  Tape tape;
  std::vector<Tape::Id> params;
  Tape::Id F = 0;
  Tape::Id alpha = 0;
  std::array<ops::BatchStats, kChannels> stats;
};

void check_input(const VexNetConfig& cfg, const NetInput& in) {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (in[c].size() != cfg.in_dims[c]) {
      throw std::invalid_argument("channel " + std::string(kChannelNames[c]) + " has dimension " +
                                  std::to_string(in[c].size()) + ", model expects " + std::to_string(cfg.in_dims[c]));
    }
  }
}

Graph build_graph(const VexNetModel& m, std::span<const NetInput> inputs, bool train_mode, std::uint64_t seed) {
  const VexNetConfig& cfg = m.config;
  const std::size_t n = inputs.size();
  if (n == 0) throw std::invalid_argument("forward needs at least one input");
  for (const NetInput& in : inputs) check_input(cfg, in);

  Graph g;
  Tape& t = g.tape;
  Matrix mask(n, kChannels, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c : {kStringChannel, kLibraryChannel}) {
      if (all_zero(inputs[r][c])) mask(r, c) = 0.0;
    }
  }

  const Rng dropout_rng = Rng(seed).split("dropout");
  std::array<Tape::Id, kChannels> contexts{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    const Projection& p = m.inputs[c];
    Matrix x(n, cfg.in_dims[c]);
    for (std::size_t r = 0; r < n; ++r) {
      const std::vector<double> unit = l2_normalized(inputs[r][c]);
      std::copy(unit.begin(), unit.end(), x.row(r).begin());
    }
    const Tape::Id xin = t.leaf(std::move(x));
    const Tape::Id w = t.leaf(p.weight);
    const Tape::Id b = t.leaf(p.bias);
    const Tape::Id gamma = t.leaf(p.bn_gamma);
    const Tape::Id beta = t.leaf(p.bn_beta);
    g.params.insert(g.params.end(), {w, b, gamma, beta});
    const Tape::Id z = ops::add_row(t, ops::matmul(t, xin, w), b);
    const Tape::Id bn = train_mode ? ops::batch_norm_train(t, z, gamma, beta, cfg.bn_eps, &g.stats[c])
                                   : ops::batch_norm_eval(t, z, gamma, beta, p.running_mean.data,
                                                          p.running_var.data, cfg.bn_eps);
    Tape::Id ctx = ops::silu(t, bn);
    if (train_mode && cfg.dropout > 0) {
      Rng rng = dropout_rng.split(c);
      Matrix keep(n, cfg.context_dim);
      const double scale = 1.0 / (1.0 - cfg.dropout);
      for (double& k : keep.data) k = rng.bernoulli(cfg.dropout) ? 0.0 : scale;
      ctx = ops::mul_const(t, ctx, keep);
    }
    contexts[c] = ctx;
  }
  const Tape::Id u = t.leaf(m.attention);
  const Tape::Id wo = t.leaf(m.out_weight);
  const Tape::Id bo = t.leaf(m.out_bias);
  g.params.insert(g.params.end(), {u, wo, bo});

  std::array<Tape::Id, kChannels> logits{};
  for (std::size_t c = 0; c < kChannels; ++c) logits[c] = ops::matmul(t, contexts[c], u);
  g.alpha = ops::masked_softmax_rows(t, ops::concat_cols(t, logits), mask);
  Tape::Id pooled = ops::scale_rows(t, contexts[0], ops::column(t, g.alpha, 0));
  for (std::size_t c = 1; c < kChannels; ++c) {
    pooled = ops::add(t, pooled, ops::scale_rows(t, contexts[c], ops::column(t, g.alpha, c)));
  }
  g.F = ops::add_row(t, ops::matmul(t, pooled, wo), bo);
  return g;
}

// Runs NT-Xent on the graph's output and backpropagates.
double graph_loss(Graph& g, std::span<const MinedPair> pairs, double tau, std::vector<Matrix>* grads) {
  std::vector<std::size_t> anchors, positives;
  for (const MinedPair& p : pairs) {
    anchors.push_back(p.anchor);
    positives.push_back(p.positive);
  }
  const Tape::Id loss = ops::ntxent(g.tape, g.F, anchors, positives, tau);
  if (grads != nullptr) {
    g.tape.backward(loss);
    grads->clear();
    for (Tape::Id id : g.params) grads->push_back(g.tape.grad(id));
  }
  return g.tape.value(loss)(0, 0);
}

double mean_distinct_group_distance(const Matrix& z, std::span<const std::uint32_t> labels) {
  const Matrix d = cosine_distances(z);
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    for (std::size_t j = i + 1; j < z.rows; ++j) {
      if (labels[i] == labels[j]) continue;
      sum += d(i, j);
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

// Whole groups are packed into batches of about batch_size samples so that
// every anchor with a sibling finds its positive in the same batch.
std::vector<std::vector<std::size_t>> make_batches(const std::map<std::uint32_t, std::vector<std::size_t>>& groups,
                                                   std::size_t batch_size, Rng& rng) {
  std::vector<std::vector<std::size_t>> members;
  for (const auto& [label, idx] : groups) members.push_back(idx);
  rng.shuffle(members.begin(), members.end());
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t groups_in_current = 0;
  for (auto& group : members) {
    rng.shuffle(group.begin(), group.end());
    if (!current.empty() && groups_in_current >= 2 && current.size() + group.size() > batch_size) {
      batches.push_back(std::move(current));
      current.clear();
      groups_in_current = 0;
    }
    current.insert(current.end(), group.begin(), group.end());
    ++groups_in_current;
  }
  if (groups_in_current >= 2 || batches.empty()) {
    batches.push_back(std::move(current));
  } else {
    batches.back().insert(batches.back().end(), current.begin(), current.end());
  }
  return batches;
}

void append_number(std::string& out, double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ModelError("model line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line, std::string_view key) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(line, "malformed value for " + std::string(key) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    const std::size_t q = std::min(line.find(' ', p), line.size());
    if (q > p) out.push_back(line.substr(p, q - p));
    p = q + 1;
  }
  return out;
}

constexpr std::string_view kModelHeader = "peepvec-model v1";

}  // namespace

void VexNetConfig::validate() const {
  for (std::size_t d : in_dims) {
    if (d == 0) throw std::invalid_argument("input dimensions must be positive");
  }
  if (context_dim == 0 || out_dim == 0) throw std::invalid_argument("context and output dimensions must be positive");
  if (!(temperature > 0) || !std::isfinite(temperature)) throw std::invalid_argument("temperature must be positive");
  if (!(dropout >= 0 && dropout < 1)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(bn_momentum >= 0 && bn_momentum <= 1)) throw std::invalid_argument("batch-norm momentum must lie in [0, 1]");
  if (!(bn_eps > 0)) throw std::invalid_argument("batch-norm epsilon must be positive");
  if (batch_size < 2) throw std::invalid_argument("batch size must be at least 2");
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw std::invalid_argument("learning-rate decay must lie in (0, 1]");
}

bool VexNetConfig::same_architecture(const VexNetConfig& o) const {
  return in_dims == o.in_dims && context_dim == o.context_dim && out_dim == o.out_dim;
}

VexNetModel VexNetModel::init(const VexNetConfig& config) {
  config.validate();
  VexNetModel m;
  m.config = config;
  const Rng rng = Rng(config.seed).split("init");
  const std::size_t h = config.context_dim;
  for (std::size_t c = 0; c < kChannels; ++c) {
    Projection& p = m.inputs[c];
    const double bound = 1.0 / std::sqrt(static_cast<double>(config.in_dims[c]));
    p.weight = Matrix(config.in_dims[c], h);
    p.bias = Matrix(1, h);
    fill_uniform(p.weight, rng.split("in" + std::to_string(c) + ".weight"), bound);
    fill_uniform(p.bias, rng.split("in" + std::to_string(c) + ".bias"), bound);
    p.bn_gamma = Matrix(1, h, 1.0);
    p.bn_beta = Matrix(1, h, 0.0);
    p.running_mean = Matrix(1, h, 0.0);
    p.running_var = Matrix(1, h, 1.0);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  m.attention = Matrix(h, 1);
  m.out_weight = Matrix(h, config.out_dim);
  m.out_bias = Matrix(1, config.out_dim);
  fill_uniform(m.attention, rng.split("attention.u"), bound);
  fill_uniform(m.out_weight, rng.split("out.weight"), bound);
  fill_uniform(m.out_bias, rng.split("out.bias"), bound);
  return m;
}

std::vector<Matrix*> VexNetModel::parameters() {
  std::vector<Matrix*> out;
  for (Projection& p : inputs) out.insert(out.end(), {&p.weight, &p.bias, &p.bn_gamma, &p.bn_beta});
  out.insert(out.end(), {&attention, &out_weight, &out_bias});
  return out;
}

std::vector<const Matrix*> VexNetModel::parameters() const {
  auto ps = const_cast<VexNetModel*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

std::vector<std::pair<std::string, Matrix*>> VexNetModel::blocks() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const std::string pre = "in" + std::to_string(c) + ".";
    Projection& p = inputs[c];
    out.emplace_back(pre + "weight", &p.weight);
    out.emplace_back(pre + "bias", &p.bias);
    out.emplace_back(pre + "bn_gamma", &p.bn_gamma);
    out.emplace_back(pre + "bn_beta", &p.bn_beta);
    out.emplace_back(pre + "bn_mean", &p.running_mean);
    out.emplace_back(pre + "bn_var", &p.running_var);
  }
  out.emplace_back("attention.u", &attention);
  out.emplace_back("out.weight", &out_weight);
  out.emplace_back("out.bias", &out_bias);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> VexNetModel::blocks() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, ptr] : const_cast<VexNetModel*>(this)->blocks()) out.emplace_back(name, ptr);
  return out;
}

NetInput network_input(const FunctionEmbedding& e) { return {e.O, e.T, e.A, e.S, e.L}; }

std::vector<double> l2_normalized(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  std::vector<double> out(x.begin(), x.end());
  if (s == 0) return out;
  const double norm = std::sqrt(s);
  for (double& v : out) v /= norm;
  return out;
}

BatchForward forward_batch(const VexNetModel& m, std::span<const NetInput> inputs, bool train_mode,
                           std::uint64_t seed) {
  Graph g = build_graph(m, inputs, train_mode, seed);
  return {g.tape.value(g.F), g.tape.value(g.alpha)};
}

ForwardResult forward(const VexNetModel& m, const NetInput& input, bool train_mode, std::uint64_t seed) {
  const BatchForward b = forward_batch(m, std::span<const NetInput>(&input, 1), train_mode, seed);
  ForwardResult r;
  r.F.assign(b.F.data.begin(), b.F.data.end());
  std::copy(b.alpha.data.begin(), b.alpha.data.end(), r.alpha.begin());
  return r;
}

ForwardResult forward(const VexNetModel& m, const FunctionEmbedding& e, bool train_mode, std::uint64_t seed) {
  return forward(m, network_input(e), train_mode, seed);
}

Matrix embed_all(const VexNetModel& m, std::span<const NetInput> inputs, std::size_t workers) {
  constexpr std::size_t kChunk = 64;
  Matrix out(inputs.size(), m.config.out_dim);
  const std::size_t chunks = (inputs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t k) {
    const std::size_t lo = k * kChunk;
    const std::size_t hi = std::min(inputs.size(), lo + kChunk);
    const BatchForward b = forward_batch(m, inputs.subspan(lo, hi - lo));
    std::copy(b.F.data.begin(), b.F.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(lo * out.cols));
  });
  return out;
}

std::vector<MinedPair> mine_batch(const Matrix& distances, std::span<const std::uint32_t> labels) {
  const std::size_t n = labels.size();
  if (distances.rows != n || distances.cols != n) throw std::invalid_argument("distance matrix must be B x B");
  if (n == 0 || std::all_of(labels.begin(), labels.end(), [&](std::uint32_t l) { return l == labels[0]; })) {
    throw std::invalid_argument("mining needs at least two groups in the batch");
  }
  std::vector<MinedPair> out;
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t pos = n, neg = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == a) continue;
      if (labels[k] == labels[a]) {
        if (pos == n || distances(a, k) < distances(a, pos)) pos = k;
      } else if (neg == n || distances(a, k) < distances(a, neg)) {
        neg = k;
      }
    }
    if (pos != n) out.push_back({a, pos, neg});
  }
  return out;
}

Matrix cosine_distances(const Matrix& z) {
  std::vector<double> norm(z.rows);
  for (std::size_t r = 0; r < z.rows; ++r) {
    double s = 0;
    for (double v : z.row(r)) s += v * v;
    norm[r] = std::sqrt(s);
  }
  Matrix d(z.rows, z.rows);
  for (std::size_t i = 0; i < z.rows; ++i) {
    for (std::size_t j = 0; j < z.rows; ++j) {
      if (i == j) continue;
      double dot = 0;
      for (std::size_t c = 0; c < z.cols; ++c) dot += z(i, c) * z(j, c);
      const double denom = norm[i] * norm[j];
      d(i, j) = 1.0 - (denom == 0 ? 0.0 : dot / denom);
    }
  }
  return d;
}

NtXentResult ntxent_loss(const Matrix& z, std::span<const std::uint32_t> labels, std::span<const MinedPair> pairs,
                         double tau) {
  if (labels.size() != z.rows) throw std::invalid_argument("one label per embedding row is required");
  if (pairs.empty()) throw std::invalid_argument("NT-Xent needs at least one anchor with a positive");
  std::vector<std::size_t> anchors, positives;
  for (const MinedPair& p : pairs) {
    if (p.anchor >= z.rows || p.positive >= z.rows || p.anchor == p.positive ||
        labels[p.anchor] != labels[p.positive]) {
      throw std::invalid_argument("anchor " + std::to_string(p.anchor) + " has no positive in its group");
    }
    anchors.push_back(p.anchor);
    positives.push_back(p.positive);
  }
  Tape t;
  const Tape::Id zid = t.leaf(z);
  const Tape::Id loss = ops::ntxent(t, zid, anchors, positives, tau);
  t.backward(loss);
  return {t.value(loss)(0, 0), t.grad(zid)};
}

double batch_loss(const VexNetModel& m, std::span<const NetInput> inputs, std::span<const MinedPair> pairs,
                  std::uint64_t seed, std::vector<Matrix>* grads, std::array<ops::BatchStats, kChannels>* stats) {
  Graph g = build_graph(m, inputs, true, seed);
  const double loss = graph_loss(g, pairs, m.config.temperature, grads);
  if (stats != nullptr) *stats = g.stats;
  return loss;
}

TrainResult train(VexNetModel model, std::span<const NetInput> inputs, std::span<const std::uint32_t> labels,
                  const VexNetConfig& cfg) {
  cfg.validate();
  if (!cfg.same_architecture(model.config)) throw std::invalid_argument("training config does not match the model");
  if (inputs.empty()) throw std::invalid_argument("training needs a non-empty dataset");
  if (labels.size() != inputs.size()) throw std::invalid_argument("one group label per input is required");
  std::map<std::uint32_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  if (groups.size() < 2) throw std::invalid_argument("training needs at least two groups");
  for (const NetInput& in : inputs) check_input(model.config, in);
  model.config = cfg;

  const Rng root(cfg.seed);
  std::vector<std::size_t> validation(inputs.size());
  std::iota(validation.begin(), validation.end(), 0);
  Rng vrng = root.split("validation");
  vrng.shuffle(validation.begin(), validation.end());
  validation.resize(std::min(validation.size(), kValidationSlice));
  std::sort(validation.begin(), validation.end());
  std::vector<NetInput> vinputs;
  std::vector<std::uint32_t> vlabels;
  for (std::size_t i : validation) {
    vinputs.push_back(inputs[i]);
    vlabels.push_back(labels[i]);
  }

  TrainResult result;
  result.initial_spread = mean_distinct_group_distance(embed_all(model, vinputs), vlabels);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  std::vector<Matrix*> params = model.parameters();
  std::vector<Matrix> m1, m2;
  for (Matrix* p : params) {
    m1.emplace_back(p->rows, p->cols);
    m2.emplace_back(p->rows, p->cols);
  }
  std::uint64_t step = 0;
  double lr = cfg.lr;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = root.split("epoch").split(epoch);
    const auto batches = make_batches(groups, cfg.batch_size, erng);
    double loss_sum = 0;
    std::size_t anchor_count = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& batch = batches[bi];
      std::vector<NetInput> binputs;
      std::vector<std::uint32_t> blabels;
      for (std::size_t i : batch) {
        binputs.push_back(inputs[i]);
        blabels.push_back(labels[i]);
      }
      Graph g = build_graph(model, binputs, true, erng.split(bi).next());
      const std::vector<MinedPair> pairs = mine_batch(cosine_distances(g.tape.value(g.F)), blabels);
      if (pairs.empty()) continue;
      std::vector<Matrix> grads;
      const double loss = graph_loss(g, pairs, cfg.temperature, &grads);
      loss_sum += loss * static_cast<double>(pairs.size());
      anchor_count += pairs.size();

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        std::vector<double>& w = params[k]->data;
        for (std::size_t e = 0; e < w.size(); ++e) {
          const double gr = grads[k].data[e];
          m1[k].data[e] = kBeta1 * m1[k].data[e] + (1 - kBeta1) * gr;
          m2[k].data[e] = kBeta2 * m2[k].data[e] + (1 - kBeta2) * gr * gr;
          w[e] -= lr * (m1[k].data[e] / c1) / (std::sqrt(m2[k].data[e] / c2) + kAdamEps);
        }
      }
      for (std::size_t c = 0; c < kChannels; ++c) {
        Projection& p = model.inputs[c];
        for (std::size_t j = 0; j < cfg.context_dim; ++j) {
          p.running_mean.data[j] =
              (1 - cfg.bn_momentum) * p.running_mean.data[j] + cfg.bn_momentum * g.stats[c].mean[j];
          p.running_var.data[j] = (1 - cfg.bn_momentum) * p.running_var.data[j] + cfg.bn_momentum * g.stats[c].var[j];
        }
      }
    }
    result.history.push_back({epoch + 1, anchor_count == 0 ? 0.0 : loss_sum / static_cast<double>(anchor_count), lr});
    lr *= cfg.lr_decay;
  }
  result.final_spread = mean_distinct_group_distance(embed_all(model, vinputs), vlabels);
  result.collapse_warning =
      result.final_spread <= kCollapseRatio * result.initial_spread || result.final_spread < kCollapseFloor;
  result.model = std::move(model);
  return result;
}

std::string format_history(std::span<const HistoryRow> history) {
  std::string out = "epoch,loss,lr\n";
  for (const HistoryRow& h : history) {
    out += std::to_string(h.epoch);
    out += ',';
    append_number(out, h.loss);
    out += ',';
    append_number(out, h.lr);
    out += '\n';
  }
  return out;
}

std::string format_model(const VexNetModel& m) {
  const VexNetConfig& c = m.config;
  std::string out(kModelHeader);
  out += "\nM in_dims";
  for (std::size_t d : c.in_dims) out += " " + std::to_string(d);
  out += "\nM context_dim " + std::to_string(c.context_dim);
  out += "\nM out_dim " + std::to_string(c.out_dim);
  const std::pair<const char*, double> reals[] = {{"dropout", c.dropout},         {"temperature", c.temperature},
                                                  {"bn_momentum", c.bn_momentum}, {"bn_eps", c.bn_eps},
                                                  {"lr", c.lr},                   {"lr_decay", c.lr_decay}};
  for (const auto& [key, value] : reals) {
    out += "\nM ";
    out += key;
    out += ' ';
    append_number(out, value);
  }
  out += "\nM batch_size " + std::to_string(c.batch_size);
  out += "\nM epochs " + std::to_string(c.epochs);
  out += "\nM seed " + std::to_string(c.seed);
  out += '\n';
  for (const auto& [name, mat] : m.blocks()) {
    out += "P " + name + " " + std::to_string(mat->rows) + " " + std::to_string(mat->cols);
    for (double x : mat->data) {
      out += ' ';
      append_number(out, x);
    }
    out += '\n';
  }
  return out;
}

VexNetModel parse_model(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t p = 0; p < text.size();) {
    const std::size_t q = std::min(text.find('\n', p), text.size());
    lines.push_back(text.substr(p, q - p));
    p = q + 1;
  }
  if (lines.empty() || lines[0] != kModelHeader) {
    if (!lines.empty() && lines[0].starts_with("peepvec-model ")) {
      throw ModelError("unsupported model version '" + std::string(lines[0].substr(14)) + "', expected " +
                       std::string(kModelHeader));
    }
    throw ModelError("missing model header, expected " + std::string(kModelHeader));
  }

  std::map<std::string, std::pair<std::size_t, std::vector<std::string_view>>> meta;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i].starts_with("M "); ++i) {
    auto f = split_spaces(lines[i].substr(2));
    if (f.size() < 2) fail(i + 1, "meta line needs a key and a value");
    const std::string key(f[0]);
    if (meta.contains(key)) fail(i + 1, "duplicate meta key " + key);
    meta[key] = {i + 1, {f.begin() + 1, f.end()}};
  }
  auto take = [&](const std::string& key, std::size_t count) -> std::pair<std::size_t, std::vector<std::string_view>> {
    auto it = meta.find(key);
    if (it == meta.end()) fail(i + 1, "missing meta key " + key);
    if (it->second.second.size() != count) fail(it->second.first, "wrong value count for " + key);
    return it->second;
  };
  VexNetConfig c;
  {
    auto [ln, v] = take("in_dims", kChannels);
    for (std::size_t k = 0; k < kChannels; ++k) c.in_dims[k] = parse_field<std::size_t>(v[k], ln, "in_dims");
  }
  auto size_field = [&](const char* key) {
    auto [ln, v] = take(key, 1);
    return parse_field<std::size_t>(v[0], ln, key);
  };
  auto real_field = [&](const char* key) {
    auto [ln, v] = take(key, 1);
    return parse_field<double>(v[0], ln, key);
  };
  c.context_dim = size_field("context_dim");
  c.out_dim = size_field("out_dim");
  c.dropout = real_field("dropout");
  c.temperature = real_field("temperature");
  c.bn_momentum = real_field("bn_momentum");
  c.bn_eps = real_field("bn_eps");
  c.lr = real_field("lr");
  c.lr_decay = real_field("lr_decay");
  c.batch_size = size_field("batch_size");
  c.epochs = size_field("epochs");
  {
    auto [ln, v] = take("seed", 1);
    c.seed = parse_field<std::uint64_t>(v[0], ln, "seed");
  }
  if (meta.size() != 12) fail(i, "unknown meta key");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(i, e.what());
  }

  VexNetModel m = VexNetModel::init(c);
  std::map<std::string, Matrix*> wanted;
  std::map<std::string, std::pair<std::size_t, std::size_t>> shapes;
  for (auto& [name, mat] : m.blocks()) {
    wanted[name] = mat;
    shapes[name] = {mat->rows, mat->cols};
  }
  std::map<std::string, bool> seen;
  for (; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty() && i + 1 == lines.size()) break;
    if (!line.starts_with("P ")) fail(i + 1, "expected a parameter block");
    auto f = split_spaces(line.substr(2));
    if (f.size() < 3) fail(i + 1, "parameter block needs a name and a shape");
    const std::string name(f[0]);
    auto it = wanted.find(name);
    if (it == wanted.end()) fail(i + 1, "unknown parameter block " + name);
    if (seen[name]) fail(i + 1, "duplicate parameter block " + name);
    seen[name] = true;
    const auto rows = parse_field<std::size_t>(f[1], i + 1, name);
    const auto cols = parse_field<std::size_t>(f[2], i + 1, name);
    if (std::pair{rows, cols} != shapes[name]) fail(i + 1, "block " + name + " has the wrong shape");
    if (f.size() - 3 != rows * cols) {
      fail(i + 1, "block " + name + " expects " + std::to_string(rows * cols) + " values, got " +
                      std::to_string(f.size() - 3));
    }
    Matrix mat(rows, cols);
    for (std::size_t k = 0; k < mat.data.size(); ++k) {
      mat.data[k] = parse_field<double>(f[k + 3], i + 1, name);
      if (!std::isfinite(mat.data[k])) fail(i + 1, "block " + name + " holds a non-finite value");
    }
    *it->second = std::move(mat);
  }
  for (const auto& [name, mat] : wanted) {
    if (!seen[name]) throw ModelError("truncated model: missing parameter block " + name);
  }
  return m;
}

void save_model(const VexNetModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << format_model(m);
  if (!out) throw ModelError("failed writing " + path.string());
}

VexNetModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace peepvec
