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
#include <functional>
#include <span>
#include <string>

#include "perspex/tc/autodiff.hpp"

namespace perspex::tc {

struct GradcheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst;  // "<input index>[<entry>]" of the largest relative error
};

/// Compares reverse-mode gradients of `loss_fn` (a scalar function of the
/// current values of `inputs`) with central finite differences
/// (f(x + eps) - f(x - eps)) / (2 eps), entry by entry.
///
/// Relative error per entry is |analytic - numeric| / max(|analytic|, |numeric|, floor).
/// `max_entries` > 0 checks an evenly strided subset of each input.
GradcheckReport gradcheck(const std::function<Var()>& loss_fn, std::span<Var> inputs,
                          double eps = 1e-4, double floor = 1e-3, std::size_t max_entries = 0);

}  // namespace perspex::tc
