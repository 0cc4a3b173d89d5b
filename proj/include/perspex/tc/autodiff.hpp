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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "perspex/tc/matrix.hpp"

namespace perspex::tc {

/// One value in the computation graph. Children hold their parents; the
/// graph is released when the last handle to the loss goes away.
struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it ("absent")
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Gradient accumulator, zero-allocated on first use.
  Matrix& grad_buffer();
};

/// Shared handle to a graph node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(Matrix value);
  static Var parameter(Matrix value);

  const Matrix& value() const { return node_->value; }
  /// Direct write access; used by optimizers and finite-difference probes.
  Matrix& mutable_value() const { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void clear_grad() const { node_->grad = Matrix(); }

  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value[0]; }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

/// True unless a NoGradGuard is alive on this thread.
bool grad_enabled();

/// Disables graph recording for the guard's lifetime (inference, frozen parts).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Builds a result node. The node records parents and `backward` only when
/// recording is enabled and some parent requires a gradient.
Var make_op(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward);

/// Adds `delta` into the parent's gradient when that parent tracks one.
void accumulate_grad(Node& parent, const Matrix& delta);

/// Reverse sweep from a 1x1 output, seeding d(loss)/d(loss) = 1.
void backward(const Var& loss);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
/// Adds a 1 x n row to every row of `a`.
Var add_row(const Var& a, const Var& row);
/// Adds a constant matrix of the same shape (positional encodings).
Var add_constant(const Var& a, const Matrix& c);

// ---- pointwise nonlinearities ----
Var gelu(const Var& a);  // tanh approximation
Var tanh(const Var& a);
Var sigmoid(const Var& a);

// ---- shape ----
Var slice_cols(const Var& a, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var reshape(const Var& a, std::size_t rows, std::size_t cols);
/// Row lookup into `table`; the embedding primitive.
Var gather_rows(const Var& table, std::span<const int> ids);

// ---- normalization / attention ----
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);
/// Row-wise softmax over entries where allow(i, j) != 0; disallowed entries
/// get weight exactly 0. Every row needs at least one allowed entry.
Var masked_softmax_rows(const Var& scores, const Matrix& allow);
/// Inverted dropout driven by `rng`. Identity when rate == 0.
Var dropout(const Var& a, double rate, std::mt19937_64& rng);

// ---- reductions / losses ----
Var sum(const Var& a);
/// Sum over rows of -log softmax(logits[r])[targets[r]].
Var cross_entropy_sum(const Var& logits, std::span<const int> targets);
/// Sum over elements of -(t log p + (1 - t) log(1 - p)), p clamped away from {0, 1}.
Var binary_cross_entropy_sum(const Var& probs, const Matrix& targets);

}  // namespace perspex::tc
