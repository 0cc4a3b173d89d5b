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

#include "perspex/tc/optim.hpp"

#include <cmath>

#include "perspex/error.hpp"

namespace perspex::tc {

LinearWarmupSchedule::LinearWarmupSchedule(double peak, std::size_t total_steps, double warmup_ratio)
    : peak_(peak), total_(total_steps) {
  if (total_steps == 0) throw ArgumentError("schedule: total_steps must be > 0");
  warmup_ = static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
  if (warmup_ > total_) warmup_ = total_;
}

double LinearWarmupSchedule::lr_at(std::size_t step) const {
  if (step >= total_) return 0.0;
  if (step < warmup_) return peak_ * static_cast<double>(step) / static_cast<double>(warmup_);
  return peak_ * static_cast<double>(total_ - step) / static_cast<double>(total_ - warmup_);
}

double clip_global_norm(ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& p : store.params()) {
    if (!p.var.has_grad()) continue;
    for (double g : p.var.grad().values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) {
    for (const auto& p : store.params()) {
      if (!p.var.has_grad()) continue;
      for (double g : p.var.grad().values()) {
        if (!std::isfinite(g)) throw DivergenceError("non-finite gradient in parameter " + p.name);
      }
    }
    throw DivergenceError("gradient norm overflow");
  }
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : store.params()) {
      if (!p.var.has_grad()) continue;
      for (double& g : p.var.node()->grad.values()) g *= s;
    }
  }
  return norm;
}

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw DivergenceError("non-finite gradient norm");
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g) v *= s;
  }
  return norm;
}

void AdamW::step(ParamStore& store, double lr) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(options_.beta1, t);
  const double bc2 = 1.0 - std::pow(options_.beta2, t);
  for (auto& p : store.params()) {
    if (!p.var.has_grad()) continue;
    Matrix& value = p.var.mutable_value();
    const Matrix& grad = p.var.grad();
    auto [it, inserted] = state_.try_emplace(p.name);
    if (inserted) {
      it->second.m = Matrix(value.rows(), value.cols());
      it->second.v = Matrix(value.rows(), value.cols());
    }
    auto m = it->second.m.values();
    auto v = it->second.v.values();
    auto w = value.values();
    auto g = grad.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw DivergenceError("non-finite gradient in parameter " + p.name + " at optimizer step " +
                              std::to_string(step_));
      }
      w[i] -= lr * options_.weight_decay * w[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
      if (!std::isfinite(w[i])) {
        throw DivergenceError("non-finite value in parameter " + p.name + " after optimizer step " +
                              std::to_string(step_));
      }
    }
  }
}

}  // namespace perspex::tc
