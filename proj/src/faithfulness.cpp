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

#include "perspex/faithfulness.hpp"

#include <algorithm>
#include <map>

#include "perspex/error.hpp"

namespace perspex::metrics {

using nlohmann::json;

double best_rouge_l(std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw ArgumentError("no reference rationale");
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, rouge_l(candidate, r));
  return best;
}

std::vector<double> embed_text(const explainer::Explainer& embedder, const text::Vocab& vocab, std::string_view s,
                               bool embedding_probe) {
  if (text::tokenize(s).empty()) throw ArgumentError("semantic similarity of an empty text");
  const auto ids = text::encode(s, vocab, static_cast<std::size_t>(embedder.config().max_len_explainer_in), true);
  return embedder.text_vector(ids, embedding_probe);
}

double semantic_similarity(const explainer::Explainer& embedder, const text::Vocab& vocab, std::string_view a,
                           std::string_view b, bool embedding_probe) {
  const auto va = embed_text(embedder, vocab, a, embedding_probe);
  const auto vb = embed_text(embedder, vocab, b, embedding_probe);
  return cosine01(va, vb);
}

double entailment_score(const passport::PassportClassifier& judge, const text::Vocab& vocab,
                        const corpus::Instance& inst, std::string_view explanation) {
  const std::string input = inst.context + " " + inst.statement + " | " + std::string(explanation);
  const auto ids = text::encode(input, vocab, static_cast<std::size_t>(judge.config().max_len_classifier), true);
  const auto probs = judge.predict(ids);
  double s = 0.0;
  for (const auto& p : probs) s += p[static_cast<std::size_t>(corpus::Label::kE)];
  return s / static_cast<double>(probs.size());
}

namespace {

std::vector<std::string> references_for(const corpus::Corpus& corpus, const explainer::GeneratedExplanation& g) {
  const auto* inst = corpus.find_instance(g.instance_id);
  const auto* j = inst ? inst->judgment_for(g.annotator_id) : nullptr;
  if (!j) {
    throw AlignmentError("generation for " + g.instance_id + "/" + g.annotator_id + " has no gold judgment");
  }
  std::vector<std::string> refs;
  for (const auto& p : j->pairs) refs.push_back(p.rationale);
  return refs;
}

double best_similarity(const explainer::Explainer& embedder, const text::Vocab& vocab, const std::string& cand,
                       const std::vector<std::string>& refs) {
  const auto vc = embed_text(embedder, vocab, cand);
  double best = 0.0;
  for (const auto& r : refs) best = std::max(best, cosine01(vc, embed_text(embedder, vocab, r)));
  return best;
}

}  // namespace

FaithfulnessReport faithfulness_report(std::span<const explainer::GeneratedExplanation> generations,
                                       const corpus::Corpus& corpus, const passport::PassportClassifier& judge,
                                       const explainer::Explainer& embedder, const text::Vocab& vocab) {
  FaithfulnessReport r;
  std::vector<double> sem, rouge, ent;
  for (const auto& g : generations) {
    const auto refs = references_for(corpus, g);
    if (g.empty || text::tokenize(g.text).empty()) {
      ++r.excluded;
      continue;
    }
    FaithfulnessItem item{g.instance_id, g.annotator_id, best_similarity(embedder, vocab, g.text, refs),
                          best_rouge_l(g.text, refs),
                          entailment_score(judge, vocab, *corpus.find_instance(g.instance_id), g.text)};
    sem.push_back(item.semantic_similarity);
    rouge.push_back(item.rouge_l);
    ent.push_back(item.entailment);
    r.items.push_back(std::move(item));
  }
  if (r.items.empty()) throw ArgumentError("no non-empty generations to score");
  r.semantic_similarity = summarize(sem);
  r.rouge_l = summarize(rouge);
  r.entailment = summarize(ent);
  return r;
}

json to_json(const FaithfulnessReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    items.push_back({{"instance_id", it.instance_id},
                     {"annotator_id", it.annotator_id},
                     {"semantic_similarity", it.semantic_similarity},
                     {"rouge_l", it.rouge_l},
                     {"entailment", it.entailment}});
  }
  return {{"included", r.items.size()},
          {"excluded", r.excluded},
          {"semantic_similarity", to_json(r.semantic_similarity)},
          {"rouge_l", to_json(r.rouge_l)},
          {"entailment", to_json(r.entailment)},
          {"items", items}};
}

EvalReport evaluate(const corpus::Corpus& corpus, corpus::Split split, const passport::PredictionDump& dump,
                    const calibrate::ThresholdConfig& thresholds,
                    std::span<const explainer::GeneratedExplanation> generations,
                    const explainer::Explainer& embedder, const text::Vocab& vocab) {
  thresholds.validate();
  const auto gold = corpus::build_annotation_tensor(corpus, split);
  if (dump.instance_ids != gold.instance_ids() || dump.annotator_ids != gold.annotator_ids()) {
    throw AlignmentError("prediction dump does not align with the " + std::string(corpus::split_name(split)) +
                        " split of the corpus");
  }
  const auto preds = calibrate::predict_all(dump.probs, thresholds.tau);
  const auto f1 = macro_f1_per_annotator(preds, gold);
  const auto em = exact_match_per_annotator(preds, gold);

  std::map<std::string, std::pair<double, double>> text_sums;
  std::map<std::string, std::size_t> text_counts;
  for (const auto& g : generations) {
    const auto* inst = corpus.find_instance(g.instance_id);
    if (!inst || inst->split != split) {
      throw AlignmentError("generation " + g.instance_id + " is not in the " + std::string(corpus::split_name(split)) +
                          " split");
    }
    const auto refs = references_for(corpus, g);
    const bool empty = g.empty || text::tokenize(g.text).empty();
    auto& s = text_sums[g.annotator_id];
    s.first += empty ? 0.0 : best_rouge_l(g.text, refs);
    s.second += empty ? 0.0 : best_similarity(embedder, vocab, g.text, refs);
    ++text_counts[g.annotator_id];
  }

  std::vector<AnnotatorRow> rows;
  for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
    AnnotatorRow row;
    row.annotator_id = gold.annotator_ids()[j];
    row.macro_f1 = f1[j];
    row.exact_match = em[j];
    for (std::size_t i = 0; i < gold.num_instances(); ++i) row.pairs += gold.observed(i, j) ? 1 : 0;
    if (auto it = text_counts.find(row.annotator_id); it != text_counts.end()) {
      row.rouge_l = text_sums[row.annotator_id].first / static_cast<double>(it->second);
      row.semantic_similarity = text_sums[row.annotator_id].second / static_cast<double>(it->second);
    }
    rows.push_back(std::move(row));
  }
  return make_eval_report(std::move(rows), std::string(calibrate::mode_name(thresholds.mode)));
}

}  // namespace perspex::metrics
