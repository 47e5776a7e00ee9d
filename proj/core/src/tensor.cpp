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

#include "peepvec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace peepvec {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("tensor shape mismatch: ") + what);
}

void accumulate(Matrix& into, const Matrix& from) {
  for (std::size_t i = 0; i < into.data.size(); ++i) into.data[i] += from.data[i];
}

// a^T (k x n)^T times b: a is n x k, b is n x m, result k x m.
Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double x = a(r, i);
      if (x == 0) continue;
      const double* brow = b.data.data() + r * b.cols;
      double* orow = out.data.data() + i * out.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += x * brow[j];
    }
  }
  return out;
}

// a (n x m) times b^T where b is k x m; result n x k.
Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t k = 0; k < b.rows; ++k) {
      double s = 0;
      for (std::size_t j = 0; j < a.cols; ++j) s += a(r, j) * b(k, j);
      out(r, k) = s;
    }
  }
  return out;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul");
  Matrix out(a.rows, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* orow = out.data.data() + r * out.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double x = a(r, k);
      if (x == 0) continue;
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += x * brow[j];
    }
  }
  return out;
}

Tape::Id Tape::leaf(Matrix value) {
  nodes_.push_back({std::move(value), {}, nullptr});
  return nodes_.size() - 1;
}

Tape::Id Tape::push(Matrix value, Backward backward) {
  nodes_.push_back({std::move(value), {}, std::move(backward)});
  return nodes_.size() - 1;
}

Matrix& Tape::grad(Id id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty()) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Id root) {
  require(value(root).rows == 1 && value(root).cols == 1, "backward root must be 1x1");
  grad(root).data[0] += 1.0;
  for (Id id = root + 1; id-- > 0;) {
    if (nodes_[id].backward && has_grad(id)) nodes_[id].backward(*this, id);
  }
}

namespace ops {

Tape::Id matmul(Tape& t, Tape::Id a, Tape::Id b) {
  return t.push(peepvec::matmul(t.value(a), t.value(b)), [a, b](Tape& tp, Tape::Id self) {
    const Matrix& g = tp.grad(self);
    accumulate(tp.grad(a), matmul_nt(g, tp.value(b)));
    accumulate(tp.grad(b), matmul_tn(tp.value(a), g));
  });
}

Tape::Id add(Tape& t, Tape::Id a, Tape::Id b) {
  const Matrix& va = t.value(a);
  const Matrix& vb = t.value(b);
  require(va.rows == vb.rows && va.cols == vb.cols, "add");
  Matrix out = va;
  accumulate(out, vb);
  return t.push(std::move(out), [a, b](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    accumulate(tp.grad(a), g);
    accumulate(tp.grad(b), g);
  });
}

Tape::Id add_row(Tape& t, Tape::Id x, Tape::Id row) {
  const Matrix& vx = t.value(x);
  const Matrix& vr = t.value(row);
  require(vr.rows == 1 && vr.cols == vx.cols, "add_row");
  Matrix out = vx;
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) out(r, c) += vr(0, c);
  }
  return t.push(std::move(out), [x, row](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    accumulate(tp.grad(x), g);
    Matrix& gr = tp.grad(row);
    for (std::size_t r = 0; r < g.rows; ++r) {
      for (std::size_t c = 0; c < g.cols; ++c) gr(0, c) += g(r, c);
    }
  });
}

Tape::Id mul_const(Tape& t, Tape::Id x, const Matrix& c) {
  const Matrix& vx = t.value(x);
  require(vx.rows == c.rows && vx.cols == c.cols, "mul_const");
  Matrix out = vx;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= c.data[i];
  return t.push(std::move(out), [x, c](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    Matrix& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i] * c.data[i];
  });
}

Tape::Id silu(Tape& t, Tape::Id x) {
  Matrix out = t.value(x);
  for (double& v : out.data) v = v / (1.0 + std::exp(-v));
  return t.push(std::move(out), [x](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    const Matrix& vx = tp.value(x);
    Matrix& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-vx.data[i]));
      gx.data[i] += g.data[i] * s * (1.0 + vx.data[i] * (1.0 - s));
    }
  });
}

Tape::Id batch_norm_train(Tape& t, Tape::Id x, Tape::Id gamma, Tape::Id beta, double eps, BatchStats* stats) {
  const Matrix& vx = t.value(x);
  const std::size_t n = vx.rows;
  const std::size_t m = vx.cols;
  require(t.value(gamma).cols == m && t.value(beta).cols == m, "batch_norm_train");
  require(n > 0, "batch_norm_train needs rows");
  std::vector<double> mean(m, 0.0), var(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) mean[c] += vx(r, c);
  }
  for (double& v : mean) v /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) var[c] += (vx(r, c) - mean[c]) * (vx(r, c) - mean[c]);
  }
  for (double& v : var) v /= static_cast<double>(n);
  std::vector<double> inv(m);
  for (std::size_t c = 0; c < m; ++c) inv[c] = 1.0 / std::sqrt(var[c] + eps);
  Matrix xhat(n, m), out(n, m);
  const Matrix& g = t.value(gamma);
  const Matrix& b = t.value(beta);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      xhat(r, c) = (vx(r, c) - mean[c]) * inv[c];
      out(r, c) = g(0, c) * xhat(r, c) + b(0, c);
    }
  }
  if (stats != nullptr) *stats = {mean, var};
  return t.push(std::move(out), [x, gamma, beta, xhat = std::move(xhat), inv](Tape& tp, Tape::Id self) {
    const Matrix dy = tp.grad(self);
    const std::size_t n = dy.rows;
    const std::size_t m = dy.cols;
    const Matrix gv = tp.value(gamma);
    Matrix& dg = tp.grad(gamma);
    Matrix& db = tp.grad(beta);
    std::vector<double> sum_dy(m, 0.0), sum_dy_xhat(m, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        sum_dy[c] += dy(r, c);
        sum_dy_xhat[c] += dy(r, c) * xhat(r, c);
      }
    }
    for (std::size_t c = 0; c < m; ++c) {
      dg(0, c) += sum_dy_xhat[c];
      db(0, c) += sum_dy[c];
    }
    Matrix& dx = tp.grad(x);
    const double nn = static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        dx(r, c) += gv(0, c) * inv[c] * (dy(r, c) - sum_dy[c] / nn - xhat(r, c) * sum_dy_xhat[c] / nn);
      }
    }
  });
}

Tape::Id batch_norm_eval(Tape& t, Tape::Id x, Tape::Id gamma, Tape::Id beta, std::span<const double> mean,
                         std::span<const double> var, double eps) {
  const Matrix& vx = t.value(x);
  const std::size_t m = vx.cols;
  require(mean.size() == m && var.size() == m && t.value(gamma).cols == m && t.value(beta).cols == m,
          "batch_norm_eval");
  Matrix xhat(vx.rows, m), out(vx.rows, m);
  const Matrix& g = t.value(gamma);
  const Matrix& b = t.value(beta);
  std::vector<double> inv(m);
  for (std::size_t c = 0; c < m; ++c) inv[c] = 1.0 / std::sqrt(var[c] + eps);
  for (std::size_t r = 0; r < vx.rows; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      xhat(r, c) = (vx(r, c) - mean[c]) * inv[c];
      out(r, c) = g(0, c) * xhat(r, c) + b(0, c);
    }
  }
  return t.push(std::move(out), [x, gamma, beta, xhat = std::move(xhat), inv](Tape& tp, Tape::Id self) {
    const Matrix dy = tp.grad(self);
    const Matrix gv = tp.value(gamma);
    Matrix& dg = tp.grad(gamma);
    Matrix& db = tp.grad(beta);
    Matrix& dx = tp.grad(x);
    for (std::size_t r = 0; r < dy.rows; ++r) {
      for (std::size_t c = 0; c < dy.cols; ++c) {
        dg(0, c) += dy(r, c) * xhat(r, c);
        db(0, c) += dy(r, c);
        dx(r, c) += dy(r, c) * gv(0, c) * inv[c];
      }
    }
  });
}

Tape::Id column(Tape& t, Tape::Id x, std::size_t j) {
  const Matrix& vx = t.value(x);
  require(j < vx.cols, "column");
  Matrix out(vx.rows, 1);
  for (std::size_t r = 0; r < vx.rows; ++r) out(r, 0) = vx(r, j);
  return t.push(std::move(out), [x, j](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    Matrix& gx = tp.grad(x);
    for (std::size_t r = 0; r < g.rows; ++r) gx(r, j) += g(r, 0);
  });
}

Tape::Id concat_cols(Tape& t, std::span<const Tape::Id> parts) {
  require(!parts.empty(), "concat_cols needs parts");
  const std::size_t rows = t.value(parts[0]).rows;
  std::size_t cols = 0;
  for (auto p : parts) {
    require(t.value(p).rows == rows, "concat_cols rows");
    cols += t.value(p).cols;
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (auto p : parts) {
    const Matrix& v = t.value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < v.cols; ++c) out(r, off + c) = v(r, c);
    }
    off += v.cols;
  }
  std::vector<Tape::Id> ids(parts.begin(), parts.end());
  return t.push(std::move(out), [ids](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    std::size_t off = 0;
    for (auto p : ids) {
      Matrix& gp = tp.grad(p);
      for (std::size_t r = 0; r < gp.rows; ++r) {
        for (std::size_t c = 0; c < gp.cols; ++c) gp(r, c) += g(r, off + c);
      }
      off += gp.cols;
    }
  });
}

Tape::Id scale_rows(Tape& t, Tape::Id x, Tape::Id s) {
  const Matrix& vx = t.value(x);
  const Matrix& vs = t.value(s);
  require(vs.rows == vx.rows && vs.cols == 1, "scale_rows");
  Matrix out = vx;
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) out(r, c) *= vs(r, 0);
  }
  return t.push(std::move(out), [x, s](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    const Matrix vx = tp.value(x);
    const Matrix vs = tp.value(s);
    Matrix& gx = tp.grad(x);
    Matrix& gs = tp.grad(s);
    for (std::size_t r = 0; r < g.rows; ++r) {
      for (std::size_t c = 0; c < g.cols; ++c) {
        gx(r, c) += g(r, c) * vs(r, 0);
        gs(r, 0) += g(r, c) * vx(r, c);
      }
    }
  });
}

Tape::Id masked_softmax_rows(Tape& t, Tape::Id x, const Matrix& mask) {
  const Matrix& vx = t.value(x);
  require(mask.rows == vx.rows && mask.cols == vx.cols, "masked_softmax_rows");
  Matrix out(vx.rows, vx.cols);
  for (std::size_t r = 0; r < vx.rows; ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < vx.cols; ++c) {
      if (mask(r, c) != 0) mx = std::max(mx, vx(r, c));
    }
    if (mx == -INFINITY) continue;
    double z = 0;
    for (std::size_t c = 0; c < vx.cols; ++c) {
      if (mask(r, c) != 0) z += (out(r, c) = std::exp(vx(r, c) - mx));
    }
    for (std::size_t c = 0; c < vx.cols; ++c) out(r, c) /= z;
  }
  return t.push(std::move(out), [x](Tape& tp, Tape::Id self) {
    const Matrix g = tp.grad(self);
    const Matrix& a = tp.value(self);
    Matrix& gx = tp.grad(x);
    for (std::size_t r = 0; r < g.rows; ++r) {
      double dot = 0;
      for (std::size_t c = 0; c < g.cols; ++c) dot += a(r, c) * g(r, c);
      for (std::size_t c = 0; c < g.cols; ++c) gx(r, c) += a(r, c) * (g(r, c) - dot);
    }
  });
}

Tape::Id ntxent(Tape& t, Tape::Id z, std::span<const std::size_t> anchors, std::span<const std::size_t> positives,
                double tau) {
  const Matrix& vz = t.value(z);
  require(anchors.size() == positives.size(), "ntxent anchors/positives");
  if (!(tau > 0)) throw std::invalid_argument("ntxent temperature must be positive");
  const std::size_t n = vz.rows;
  const std::size_t d = vz.cols;
  constexpr double kMinNorm = 1e-12;
  std::vector<double> norm(n);
  Matrix unit(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0;
    for (double v : vz.row(r)) s += v * v;
    norm[r] = std::max(std::sqrt(s), kMinNorm);
    for (std::size_t c = 0; c < d; ++c) unit(r, c) = vz(r, c) / norm[r];
  }
  const Matrix sim = matmul_nt(unit, unit);
  // coef(i, k) = d(loss)/d(sim(i, k)).
  Matrix coef(n, n);
  double loss = 0;
  const double inv_count = anchors.empty() ? 0.0 : 1.0 / static_cast<double>(anchors.size());
  for (std::size_t q = 0; q < anchors.size(); ++q) {
    const std::size_t i = anchors[q];
    const std::size_t j = positives[q];
    require(i < n && j < n && i != j, "ntxent anchor/positive index");
    double mx = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) mx = std::max(mx, sim(i, k) / tau);
    }
    double z_sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) z_sum += std::exp(sim(i, k) / tau - mx);
    }
    loss += (mx + std::log(z_sum) - sim(i, j) / tau) * inv_count;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double p = std::exp(sim(i, k) / tau - mx) / z_sum;
      coef(i, k) += (p - (k == j ? 1.0 : 0.0)) / tau * inv_count;
    }
  }
  Matrix out(1, 1, loss);
  return t.push(std::move(out), [z, unit, norm, coef](Tape& tp, Tape::Id self) {
    const double g = tp.grad(self)(0, 0);
    const std::size_t n = unit.rows;
    const std::size_t d = unit.cols;
    // sim(i,k) = u_i . u_k, so d/du_i gets coef(i,k) u_k and d/du_k gets coef(i,k) u_i.
    Matrix du(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double c = coef(i, k) * g;
        if (c == 0) continue;
        for (std::size_t e = 0; e < d; ++e) {
          du(i, e) += c * unit(k, e);
          du(k, e) += c * unit(i, e);
        }
      }
    }
    Matrix& gz = tp.grad(z);
    for (std::size_t r = 0; r < n; ++r) {
      double dot = 0;
      for (std::size_t e = 0; e < d; ++e) dot += du(r, e) * unit(r, e);
      for (std::size_t e = 0; e < d; ++e) gz(r, e) += (du(r, e) - dot * unit(r, e)) / norm[r];
    }
  });
}

}  // namespace ops

}  // namespace peepvec
