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

#include "perspex/tc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "perspex/error.hpp"

namespace perspex::tc {

GradcheckReport gradcheck(const std::function<Var()>& loss_fn, std::span<Var> inputs, double eps,
                          double floor, std::size_t max_entries) {
  for (auto& in : inputs) {
    if (!in.requires_grad()) throw ArgumentError("gradcheck: inputs must require gradients");
    in.clear_grad();
  }
  {
    const Var loss = loss_fn();
    backward(loss);
  }

  GradcheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Var& in = inputs[k];
    const Matrix analytic = in.has_grad() ? in.grad() : Matrix(in.rows(), in.cols());
    const std::size_t n = in.value().size();
    const std::size_t stride =
        (max_entries == 0 || n <= max_entries) ? 1 : (n + max_entries - 1) / max_entries;
    for (std::size_t i = 0; i < n; i += stride) {
      double numeric = 0.0;
      {
        NoGradGuard no_grad;
        const double original = in.value()[i];
        in.mutable_value()[i] = original + eps;
        const double plus = loss_fn().scalar();
        in.mutable_value()[i] = original - eps;
        const double minus = loss_fn().scalar();
        in.mutable_value()[i] = original;
        numeric = (plus - minus) / (2.0 * eps);
      }
      const double a = analytic[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel > report.max_rel_error || report.entries_checked == 0) {
        report.max_rel_error = rel;
        report.worst = std::to_string(k) + "[" + std::to_string(i) + "]";
      }
      ++report.entries_checked;
    }
  }
  for (auto& in : inputs) in.clear_grad();
  return report;
}

}  // namespace perspex::tc
