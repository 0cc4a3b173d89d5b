// Copyright 2026 The Perspex Authors.
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

#include "perspex/tc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "perspex/error.hpp"

namespace perspex::tc {

namespace {

thread_local bool g_grad_enabled = true;

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(std::string("tensorcore: ") + what);
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Matrix& Node::grad_buffer() {
  if (grad.empty()) grad = Matrix(value.rows(), value.cols());
  return grad;
}

Var Var::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var make_op(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Var& p) { return p.requires_grad(); });
    if (any) {
      n->requires_grad = true;
      n->parents.reserve(parents.size());
      for (auto& p : parents) n->parents.push_back(p.shared());
      n->backward_fn = std::move(backward);
    }
  }
  return Var(std::move(n));
}

void accumulate_grad(Node& parent, const Matrix& delta) {
  if (!parent.requires_grad) return;
  Matrix& g = parent.grad_buffer();
  auto gv = g.values();
  auto dv = delta.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += dv[i];
}

void backward(const Var& loss) {
  require(loss && loss.value().size() == 1, "backward needs a scalar output");
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order of the recorded graph.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------- algebra

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  gemm_acc(a.value(), b.value(), out);
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) gemm_nt_acc(self.grad, pb.value, pa.grad_buffer());
    if (pb.requires_grad) gemm_tn_acc(pa.value, self.grad, pb.grad_buffer());
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require(a.cols() == b.cols(), "matmul_nt shape mismatch");
  Matrix out(a.rows(), b.rows());
  gemm_nt_acc(a.value(), b.value(), out);
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    // out = a b^T: da = g b, db = g^T a
    if (pa.requires_grad) gemm_acc(self.grad, pb.value, pa.grad_buffer());
    if (pb.requires_grad) gemm_tn_acc(self.grad, pa.value, pb.grad_buffer());
  });
}

Var add(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "add shape mismatch");
  Matrix out = a.value();
  auto ov = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += bv[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    accumulate_grad(*self.parents[0], self.grad);
    accumulate_grad(*self.parents[1], self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "sub shape mismatch");
  Matrix out = a.value();
  auto ov = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= bv[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    accumulate_grad(*self.parents[0], self.grad);
    Node& pb = *self.parents[1];
    if (pb.requires_grad) {
      auto g = pb.grad_buffer().values();
      auto sg = self.grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= sg[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "mul shape mismatch");
  Matrix out = a.value();
  auto ov = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    auto sg = self.grad.values();
    if (pa.requires_grad) {
      auto g = pa.grad_buffer().values();
      auto bv = pb.value.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i] * bv[i];
    }
    if (pb.requires_grad) {
      auto g = pb.grad_buffer().values();
      auto av = pa.value.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i] * av[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Matrix out = a.value();
  for (double& v : out.values()) v *= s;
  return make_op(std::move(out), {a}, [s](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto sg = self.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * sg[i];
  });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row shape mismatch");
  Matrix out = a.value();
  const auto rv = row.value().values();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto o = out.row(r);
    for (std::size_t c = 0; c < o.size(); ++c) o[c] += rv[c];
  }
  return make_op(std::move(out), {a, row}, [](Node& self) {
    accumulate_grad(*self.parents[0], self.grad);
    Node& pr = *self.parents[1];
    if (pr.requires_grad) {
      auto g = pr.grad_buffer().values();
      for (std::size_t r = 0; r < self.grad.rows(); ++r) {
        auto sg = self.grad.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += sg[c];
      }
    }
  });
}

Var add_constant(const Var& a, const Matrix& c) {
  require(a.value().same_shape(c), "add_constant shape mismatch");
  Matrix out = a.value();
  auto ov = out.values();
  auto cv = c.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += cv[i];
  return make_op(std::move(out), {a},
                 [](Node& self) { accumulate_grad(*self.parents[0], self.grad); });
}

// ------------------------------------------------------------ pointwise

Var gelu(const Var& a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double kA = 0.044715;
  Matrix out = a.value();
  for (double& v : out.values()) {
    const double t = std::tanh(kC * (v + kA * v * v * v));
    v = 0.5 * v * (1.0 + t);
  }
  return make_op(std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto x = pa.value.values();
    auto sg = self.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = x[i];
      const double t = std::tanh(kC * (v + kA * v * v * v));
      const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kC * (1.0 + 3.0 * kA * v * v);
      g[i] += sg[i] * d;
    }
  });
}

Var tanh(const Var& a) {
  Matrix out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return make_op(std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto y = self.value.values();
    auto sg = self.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value();
  for (double& v : out.values()) v = stable_sigmoid(v);
  return make_op(std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto y = self.value.values();
    auto sg = self.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i] * y[i] * (1.0 - y[i]);
  });
}

// ---------------------------------------------------------------- shape

Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
  require(start + count <= a.cols(), "slice_cols out of range");
  Matrix out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.value().row(r);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(start), count, out.row(r).begin());
  }
  return make_op(std::move(out), {a}, [start, count](Node& self) {
    Node& pa = *self.parents[0];
    Matrix& g = pa.grad_buffer();
    for (std::size_t r = 0; r < self.grad.rows(); ++r) {
      auto dst = g.row(r);
      auto sg = self.grad.row(r);
      for (std::size_t c = 0; c < count; ++c) dst[start + c] += sg[c];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols of nothing");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "concat_cols row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    for (std::size_t r = 0; r < rows; ++r) {
      auto src = p.value().row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += p.cols();
  }
  return make_op(std::move(out), {parts.begin(), parts.end()}, [offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node& p = *self.parents[k];
      if (!p.requires_grad) continue;
      Matrix& g = p.grad_buffer();
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto dst = g.row(r);
        auto sg = self.grad.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += sg[offsets[k] + c];
      }
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows of nothing");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, "concat_rows column mismatch");
    rows += p.rows();
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& p : parts) {
    auto v = p.value().values();
    values.insert(values.end(), v.begin(), v.end());
  }
  return make_op(Matrix(rows, cols, std::move(values)), {parts.begin(), parts.end()},
                 [](Node& self) {
                   std::size_t offset = 0;
                   auto sg = self.grad.values();
                   for (auto& pp : self.parents) {
                     Node& p = *pp;
                     const std::size_t n = p.value.size();
                     if (p.requires_grad) {
                       auto g = p.grad_buffer().values();
                       for (std::size_t i = 0; i < n; ++i) g[i] += sg[offset + i];
                     }
                     offset += n;
                   }
                 });
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  require(rows * cols == a.value().size(), "reshape size mismatch");
  auto v = a.value().values();
  Matrix out(rows, cols, std::vector<double>(v.begin(), v.end()));
  return make_op(std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto sg = self.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i];
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  const std::size_t d = table.cols();
  Matrix out(ids.size(), d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    require(ids[r] >= 0 && static_cast<std::size_t>(ids[r]) < table.rows(),
            "gather_rows id out of range");
    auto src = table.value().row(static_cast<std::size_t>(ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return make_op(std::move(out), {table}, [saved = std::move(saved)](Node& self) {
    Node& pt = *self.parents[0];
    Matrix& g = pt.grad_buffer();
    for (std::size_t r = 0; r < saved.size(); ++r) {
      auto dst = g.row(static_cast<std::size_t>(saved[r]));
      auto sg = self.grad.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += sg[c];
    }
  });
}

// ------------------------------------------------- normalization/attention

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const std::size_t rows = x.rows(), n = x.cols();
  require(gain.rows() == 1 && gain.cols() == n && bias.rows() == 1 && bias.cols() == n,
          "layer_norm parameter shape mismatch");
  Matrix xhat(rows, n);
  std::vector<double> inv_std(rows);
  Matrix out(rows, n);
  const auto gv = gain.value().values();
  const auto bv = bias.value().values();
  for (std::size_t r = 0; r < rows; ++r) {
    auto xr = x.value().row(r);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    auto hr = xhat.row(r);
    auto orow = out.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      hr[c] = (xr[c] - mean) * inv;
      orow[c] = hr[c] * gv[c] + bv[c];
    }
  }
  return make_op(std::move(out), {x, gain, bias},
                 [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                   Node& px = *self.parents[0];
                   Node& pg = *self.parents[1];
                   Node& pb = *self.parents[2];
                   const std::size_t rows = xhat.rows(), n = xhat.cols();
                   const auto gv = pg.value.values();
                   if (pg.requires_grad || pb.requires_grad) {
                     Matrix& gg = pg.grad_buffer();
                     Matrix& gb = pb.grad_buffer();
                     for (std::size_t r = 0; r < rows; ++r) {
                       auto sg = self.grad.row(r);
                       auto hr = xhat.row(r);
                       for (std::size_t c = 0; c < n; ++c) {
                         gg[c] += sg[c] * hr[c];
                         gb[c] += sg[c];
                       }
                     }
                   }
                   if (px.requires_grad) {
                     Matrix& gx = px.grad_buffer();
                     std::vector<double> dh(n);
                     for (std::size_t r = 0; r < rows; ++r) {
                       auto sg = self.grad.row(r);
                       auto hr = xhat.row(r);
                       double sum_dh = 0.0, sum_dh_h = 0.0;
                       for (std::size_t c = 0; c < n; ++c) {
                         dh[c] = sg[c] * gv[c];
                         sum_dh += dh[c];
                         sum_dh_h += dh[c] * hr[c];
                       }
                       const double k = inv_std[r] / static_cast<double>(n);
                       auto dst = gx.row(r);
                       for (std::size_t c = 0; c < n; ++c) {
                         dst[c] += k * (static_cast<double>(n) * dh[c] - sum_dh - hr[c] * sum_dh_h);
                       }
                     }
                   }
                 });
}

Var masked_softmax_rows(const Var& scores, const Matrix& allow) {
  require(scores.value().same_shape(allow), "masked_softmax mask shape mismatch");
  const std::size_t rows = scores.rows(), cols = scores.cols();
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto s = scores.value().row(r);
    auto m = allow.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c)
      if (m[c] != 0.0) mx = std::max(mx, s[c]);
    require(std::isfinite(mx), "masked_softmax row with no allowed entry");
    double z = 0.0;
    auto o = out.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      if (m[c] != 0.0) {
        o[c] = std::exp(s[c] - mx);
        z += o[c];
      }
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= z;
  }
  return make_op(std::move(out), {scores}, [](Node& self) {
    Node& ps = *self.parents[0];
    Matrix& g = ps.grad_buffer();
    for (std::size_t r = 0; r < self.value.rows(); ++r) {
      auto y = self.value.row(r);
      auto sg = self.grad.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < y.size(); ++c) dot += y[c] * sg[c];
      auto dst = g.row(r);
      for (std::size_t c = 0; c < y.size(); ++c) dst[c] += y[c] * (sg[c] - dot);
    }
  });
}

Var dropout(const Var& a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  require(rate < 1.0, "dropout rate must be < 1");
  const double keep = 1.0 - rate;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix mask(a.rows(), a.cols());
  for (double& m : mask.values()) m = uni(rng) < keep ? 1.0 / keep : 0.0;
  Matrix out = a.value();
  auto ov = out.values();
  auto mv = mask.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= mv[i];
  return make_op(std::move(out), {a}, [mask = std::move(mask)](Node& self) {
    Node& pa = *self.parents[0];
    auto g = pa.grad_buffer().values();
    auto sg = self.grad.values();
    auto mv = mask.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += sg[i] * mv[i];
  });
}

// ------------------------------------------------------------ reductions

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return make_op(Matrix(1, 1, s), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    const double g0 = self.grad[0];
    for (double& g : pa.grad_buffer().values()) g += g0;
  });
}

Var cross_entropy_sum(const Var& logits, std::span<const int> targets) {
  require(targets.size() == logits.rows(), "cross_entropy target count mismatch");
  const std::size_t rows = logits.rows(), cols = logits.cols();
  Matrix probs(rows, cols);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    require(targets[r] >= 0 && static_cast<std::size_t>(targets[r]) < cols,
            "cross_entropy target out of range");
    auto l = logits.value().row(r);
    const double mx = *std::max_element(l.begin(), l.end());
    double z = 0.0;
    auto p = probs.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      p[c] = std::exp(l[c] - mx);
      z += p[c];
    }
    for (std::size_t c = 0; c < cols; ++c) p[c] /= z;
    total += (mx + std::log(z)) - l[static_cast<std::size_t>(targets[r])];
  }
  std::vector<int> saved(targets.begin(), targets.end());
  return make_op(Matrix(1, 1, total), {logits},
                 [probs = std::move(probs), saved = std::move(saved)](Node& self) {
                   Node& pl = *self.parents[0];
                   Matrix& g = pl.grad_buffer();
                   const double g0 = self.grad[0];
                   for (std::size_t r = 0; r < probs.rows(); ++r) {
                     auto p = probs.row(r);
                     auto dst = g.row(r);
                     for (std::size_t c = 0; c < p.size(); ++c) dst[c] += g0 * p[c];
                     dst[static_cast<std::size_t>(saved[r])] -= g0;
                   }
                 });
}

Var binary_cross_entropy_sum(const Var& probs, const Matrix& targets) {
  require(probs.value().same_shape(targets), "binary_cross_entropy shape mismatch");
  auto clamp = [](double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); };
  double total = 0.0;
  auto pv = probs.value().values();
  auto tv = targets.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = clamp(pv[i]);
    total -= tv[i] * std::log(p) + (1.0 - tv[i]) * std::log(1.0 - p);
  }
  return make_op(Matrix(1, 1, total), {probs}, [targets, clamp](Node& self) {
    Node& pp = *self.parents[0];
    auto g = pp.grad_buffer().values();
    auto pv = pp.value.values();
    auto tv = targets.values();
    const double g0 = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double p = clamp(pv[i]);
      g[i] += g0 * (-tv[i] / p + (1.0 - tv[i]) / (1.0 - p));
    }
  });
}

}  // namespace perspex::tc
