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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perspex/calibrate.hpp"
#include "perspex/corpus.hpp"
#include "perspex/explainer.hpp"
#include "perspex/metrics.hpp"
#include "perspex/passport.hpp"
#include "perspex/text.hpp"

namespace perspex::metrics {

/// Highest ROUGE-L of `candidate` against any of `references`.
double best_rouge_l(std::string_view candidate, std::span<const std::string> references);

/// Cosine (mapped to [0, 1]) between mean-pooled explainer encoder states
/// of the two texts. With `embedding_probe` the pooled token embeddings
/// are compared instead. Throws ArgumentError for an empty text.
double semantic_similarity(const explainer::Explainer& embedder, const text::Vocab& vocab, std::string_view a,
                           std::string_view b, bool embedding_probe = false);
/// The pooled vector semantic_similarity compares.
std::vector<double> embed_text(const explainer::Explainer& embedder, const text::Vocab& vocab, std::string_view s,
                               bool embedding_probe = false);

/// p_E for premise "<context> <statement>" and the explanation as
/// hypothesis, averaged over every annotator the classifier knows.
double entailment_score(const passport::PassportClassifier& judge, const text::Vocab& vocab,
                        const corpus::Instance& inst, std::string_view explanation);

struct FaithfulnessItem {
  std::string instance_id;
  std::string annotator_id;
  double semantic_similarity = 0.0;
  double rouge_l = 0.0;
  double entailment = 0.0;
};

struct FaithfulnessReport {
  std::vector<FaithfulnessItem> items;
  std::size_t excluded = 0;  // empty-flagged generations
  Histogram semantic_similarity;
  Histogram rouge_l;
  Histogram entailment;
};

/// Scores every non-empty generation against the judgment's rationales.
/// Throws AlignmentError for a generation without a matching judgment and
/// ArgumentError when nothing is left to score.
FaithfulnessReport faithfulness_report(std::span<const explainer::GeneratedExplanation> generations,
                                       const corpus::Corpus& corpus, const passport::PassportClassifier& judge,
                                       const explainer::Explainer& embedder, const text::Vocab& vocab);
nlohmann::json to_json(const FaithfulnessReport& r);

/// Table-style report for one split: set metrics from the prediction dump
/// under `thresholds`, text metrics from `generations` (empty generations
/// score 0). Throws AlignmentError when the dump or a generation does not
/// align with the split.
EvalReport evaluate(const corpus::Corpus& corpus, corpus::Split split, const passport::PredictionDump& dump,
                    const calibrate::ThresholdConfig& thresholds,
                    std::span<const explainer::GeneratedExplanation> generations,
                    const explainer::Explainer& embedder, const text::Vocab& vocab);

}  // namespace perspex::metrics
