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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perspex/corpus.hpp"

namespace perspex::calibrate {

using ClassProbabilities = std::array<double, corpus::kNumLabels>;

enum class ThresholdMode { kPerClass, kGlobal };
std::string_view mode_name(ThresholdMode m);
ThresholdMode parse_mode(std::string_view name);

inline constexpr double kGridLow = 0.1;
inline constexpr double kGridHigh = 0.9;

struct ThresholdConfig {
  std::array<double, corpus::kNumLabels> tau{0.5, 0.5, 0.5};
  double step = 0.05;
  ThresholdMode mode = ThresholdMode::kPerClass;

  /// Each tau in [0.1, 0.9]; step in (0, 0.8] and divides 0.8.
  void validate() const;
};
nlohmann::json to_json(const ThresholdConfig& c);
ThresholdConfig threshold_config_from_json(const nlohmann::json& j);

/// Grid points 0.1, 0.1 + step, ..., 0.9. Throws ArgumentError when step
/// does not divide the interval.
std::vector<double> threshold_grid(double step);

/// Classes with p_c >= tau_c; the argmax singleton (ties to C, then E) when
/// that would be empty.
corpus::LabelSet predict_label_set(const ClassProbabilities& p,
                                   const std::array<double, corpus::kNumLabels>& tau);

struct TuneResult {
  ThresholdConfig config;
  double mean_jaccard = 0.0;
  std::size_t points_evaluated = 0;
};

/// Exhaustive grid search maximizing mean Jaccard over observed cells of
/// `gold`. probs[i * annotators + j] aligns with the tensor. Ties go to the
/// lexicographically smallest (tau_C, tau_E, tau_N).
TuneResult tune_thresholds(std::span<const ClassProbabilities> probs, const corpus::AnnotationTensor& gold,
                           ThresholdMode mode = ThresholdMode::kPerClass, double step = 0.05);

/// Label sets for every cell (observed or not) under `tau`.
std::vector<corpus::LabelSet> predict_all(std::span<const ClassProbabilities> probs,
                                          const std::array<double, corpus::kNumLabels>& tau);

}  // namespace perspex::calibrate
