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

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "perspex/tc/nn.hpp"

namespace perspex::tc {

/// Linear warmup from 0 to `peak` over ceil(warmup_ratio * total_steps)
/// steps, then linear decay to 0 at `total_steps`.
class LinearWarmupSchedule {
 public:
  LinearWarmupSchedule(double peak, std::size_t total_steps, double warmup_ratio);
  double lr_at(std::size_t step) const;
  std::size_t warmup_steps() const { return warmup_; }
  std::size_t total_steps() const { return total_; }

 private:
  double peak_;
  std::size_t total_;
  std::size_t warmup_;
};

/// Scales every present gradient in `store` by max_norm / ||g|| when the
/// global L2 norm exceeds max_norm. Returns the norm before clipping.
/// Throws DivergenceError on a non-finite norm.
double clip_global_norm(ParamStore& store, double max_norm);

/// Same rule on free-standing vectors (used by property tests).
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);

struct AdamWOptions {
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Decoupled-weight-decay Adam with bias-corrected moments. Parameters whose
/// gradient is absent are skipped entirely.
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  /// One update with learning rate `lr`. Throws DivergenceError naming the
  /// parameter if a gradient or an updated value is not finite.
  void step(ParamStore& store, double lr);

  std::size_t steps_taken() const { return step_; }

  struct Moments {
    Matrix m;
    Matrix v;
  };
  const std::map<std::string, Moments>& state() const { return state_; }
  void restore(std::size_t steps, std::map<std::string, Moments> state) {
    step_ = steps;
    state_ = std::move(state);
  }

 private:
  AdamWOptions options_;
  std::size_t step_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace perspex::tc
