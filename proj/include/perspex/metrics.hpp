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

namespace perspex::metrics {

using corpus::AnnotationTensor;
using corpus::LabelSet;

/// |a ∩ b| / |a ∪ b|; 1 when both are empty.
double jaccard(LabelSet a, LabelSet b);

/// Predictions are laid out like the gold tensor: preds[i * annotators + j].
/// Only observed (mask = 1) cells count. Throws ArgumentError when nothing
/// is observed or the layouts disagree.
double exact_match_rate(std::span<const LabelSet> preds, const AnnotationTensor& gold);
double mean_jaccard(std::span<const LabelSet> preds, const AnnotationTensor& gold);
/// Exact-match rate over each annotator's observed pairs, in tensor column order.
std::vector<double> exact_match_per_annotator(std::span<const LabelSet> preds, const AnnotationTensor& gold);

/// What a class with no gold positives and no predicted positives scores.
enum class UndefinedClassPolicy { kExclude, kZero };

/// Macro-F1 over C/E/N for each annotator's observed pairs, in tensor column
/// order. Throws for an annotator without observed pairs, or when every class
/// is undefined under kExclude.
std::vector<double> macro_f1_per_annotator(std::span<const LabelSet> preds, const AnnotationTensor& gold,
                                           UndefinedClassPolicy policy = UndefinedClassPolicy::kExclude);
/// Unweighted mean of macro_f1_per_annotator.
double macro_f1_aggregated(std::span<const LabelSet> preds, const AnnotationTensor& gold,
                           UndefinedClassPolicy policy = UndefinedClassPolicy::kExclude);

/// Length of the longest common subsequence.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// LCS F-measure over text::tokenize tokens. Throws ArgumentError for an
/// empty reference; 0 for an empty candidate or LCS = 0.
double rouge_l(std::string_view candidate, std::string_view reference);

/// Cosine similarity mapped linearly from [-1, 1] to [0, 1]. Throws for
/// zero vectors or length mismatch.
double cosine01(std::span<const double> a, std::span<const double> b);

/// Distribution summary of scores in [0, 1].
struct Histogram {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::array<std::size_t, 10> counts{};  // bins [0,0.1), ..., [0.9,1.0]
  std::size_t total = 0;
};
/// Quartiles by linear interpolation between order statistics. Throws for
/// an empty input or a score outside [0, 1].
Histogram summarize(std::span<const double> scores);
nlohmann::json to_json(const Histogram& h);

struct AnnotatorRow {
  std::string annotator_id;
  double macro_f1 = 0.0;
  double exact_match = 0.0;
  double rouge_l = 0.0;
  double semantic_similarity = 0.0;
  std::size_t pairs = 0;
};

/// Per-annotator rows plus their unweighted mean.
struct EvalReport {
  std::vector<AnnotatorRow> rows;
  AnnotatorRow aggregated;
  std::string threshold_mode;
  std::size_t evaluated_pairs = 0;
};

/// Fills `aggregated` as the arithmetic mean of `rows`.
EvalReport make_eval_report(std::vector<AnnotatorRow> rows, std::string threshold_mode);
nlohmann::json to_json(const EvalReport& r);

}  // namespace perspex::metrics
