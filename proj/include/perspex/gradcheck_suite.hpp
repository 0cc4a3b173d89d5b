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
#include <string>
#include <vector>

#include <json.hpp>

namespace perspex {

/// Finite-difference result for one differentiable block.
struct BlockCheck {
  std::string block;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
  std::string worst;
};

/// Checks embedding, attention, layer norm, feed-forward, fusion + head,
/// focal loss, soft alignment, prefix bridge and decoder cross-entropy at
/// toy sizes (d 8, 2 heads, ffn 16, vocab 12). Inputs and parameters are
/// drawn from `seed`; every entry of every input is probed.
std::vector<BlockCheck> run_gradcheck_suite(std::uint64_t seed, double eps = 1e-4);

nlohmann::json to_json(const std::vector<BlockCheck>& checks);

}  // namespace perspex
