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

#ifndef PEEPVEC_TENSOR_HPP
#define PEEPVEC_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Dense double-precision matrices and a reverse-mode differentiation tape.
namespace peepvec {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// a (n x k) times b (k x m).
Matrix matmul(const Matrix& a, const Matrix& b);

class Tape {
 public:
  using Id = std::size_t;
  using Backward = std::function<void(Tape&, Id)>;

  // A differentiable input.
  Id leaf(Matrix value);
  // Records the result of an operation; backward(tape, self) reads
  // grad(self) and accumulates into the parents' gradients.
  Id push(Matrix value, Backward backward);

  const Matrix& value(Id id) const { return nodes_[id].value; }
  // Gradient buffer, allocated (zeroed) on first access.
  Matrix& grad(Id id);
  bool has_grad(Id id) const { return !nodes_[id].grad.data.empty(); }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs every recorded
  // backward function in reverse order.
  void backward(Id root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. Shapes are checked and mismatches throw
// std::invalid_argument.
namespace ops {

Tape::Id matmul(Tape& t, Tape::Id a, Tape::Id b);
Tape::Id add(Tape& t, Tape::Id a, Tape::Id b);
// x (n x m) plus a 1 x m row broadcast over rows.
Tape::Id add_row(Tape& t, Tape::Id x, Tape::Id row);
// Elementwise product with a constant matrix of the same shape.
Tape::Id mul_const(Tape& t, Tape::Id x, const Matrix& c);
Tape::Id silu(Tape& t, Tape::Id x);

struct BatchStats {
  std::vector<double> mean, var;  // biased variance
};
// Per-column normalization with batch statistics, then gamma * xhat + beta.
// gamma and beta are 1 x m. stats receives the batch mean and variance.
Tape::Id batch_norm_train(Tape& t, Tape::Id x, Tape::Id gamma, Tape::Id beta, double eps,
                          BatchStats* stats = nullptr);
// Same with fixed statistics.
Tape::Id batch_norm_eval(Tape& t, Tape::Id x, Tape::Id gamma, Tape::Id beta, std::span<const double> mean,
                         std::span<const double> var, double eps);

Tape::Id column(Tape& t, Tape::Id x, std::size_t j);
Tape::Id concat_cols(Tape& t, std::span<const Tape::Id> parts);
// Row r of x scaled by s(r, 0).
Tape::Id scale_rows(Tape& t, Tape::Id x, Tape::Id s);
// Row-wise softmax over entries with mask 1; masked entries are 0. A row with
// no unmasked entry is all zero.
Tape::Id masked_softmax_rows(Tape& t, Tape::Id x, const Matrix& mask);

// Mean over anchors a of -log(exp(cos(z_a, z_p)/tau) / sum_{k != a} exp(cos(z_a, z_k)/tau))
// where p = positives[a]. Returns a 1 x 1 node.
Tape::Id ntxent(Tape& t, Tape::Id z, std::span<const std::size_t> anchors, std::span<const std::size_t> positives,
                double tau);

}  // namespace ops

}  // namespace peepvec

#endif  // PEEPVEC_TENSOR_HPP
