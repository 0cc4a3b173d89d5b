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

#include "perspex/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "perspex/error.hpp"
#include "perspex/text.hpp"

namespace perspex::metrics {

double jaccard(LabelSet a, LabelSet b) {
  const std::size_t uni = a.unite(b).size();
  if (uni == 0) return 1.0;
  return static_cast<double>(a.intersect(b).size()) / static_cast<double>(uni);
}

namespace {

void check_layout(std::span<const LabelSet> preds, const AnnotationTensor& gold) {
  if (preds.size() != gold.num_instances() * gold.num_annotators()) {
    throw ArgumentError("prediction dump does not align with the gold tensor");
  }
}

}  // namespace

double exact_match_rate(std::span<const LabelSet> preds, const AnnotationTensor& gold) {
  check_layout(preds, gold);
  std::size_t hit = 0, n = 0;
  for (std::size_t i = 0; i < gold.num_instances(); ++i) {
    for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
      if (!gold.observed(i, j)) continue;
      ++n;
      hit += preds[i * gold.num_annotators() + j] == gold.label_set(i, j) ? 1 : 0;
    }
  }
  if (n == 0) throw ArgumentError("exact match over zero observed pairs");
  return static_cast<double>(hit) / static_cast<double>(n);
}

double mean_jaccard(std::span<const LabelSet> preds, const AnnotationTensor& gold) {
  check_layout(preds, gold);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gold.num_instances(); ++i) {
    for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
      if (!gold.observed(i, j)) continue;
      ++n;
      sum += jaccard(preds[i * gold.num_annotators() + j], gold.label_set(i, j));
    }
  }
  if (n == 0) throw ArgumentError("mean Jaccard over zero observed pairs");
  return sum / static_cast<double>(n);
}

std::vector<double> exact_match_per_annotator(std::span<const LabelSet> preds, const AnnotationTensor& gold) {
  check_layout(preds, gold);
  std::vector<double> out;
  for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
    std::size_t hit = 0, n = 0;
    for (std::size_t i = 0; i < gold.num_instances(); ++i) {
      if (!gold.observed(i, j)) continue;
      ++n;
      hit += preds[i * gold.num_annotators() + j] == gold.label_set(i, j) ? 1 : 0;
    }
    if (n == 0) throw ArgumentError("annotator " + gold.annotator_ids()[j] + " has no observed pairs");
    out.push_back(static_cast<double>(hit) / static_cast<double>(n));
  }
  return out;
}

std::vector<double> macro_f1_per_annotator(std::span<const LabelSet> preds, const AnnotationTensor& gold,
                                           UndefinedClassPolicy policy) {
  check_layout(preds, gold);
  std::vector<double> out;
  for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
    std::array<std::size_t, corpus::kNumLabels> tp{}, fp{}, fn{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < gold.num_instances(); ++i) {
      if (!gold.observed(i, j)) continue;
      ++n;
      const LabelSet p = preds[i * gold.num_annotators() + j];
      const LabelSet g = gold.label_set(i, j);
      for (auto l : corpus::kAllLabels) {
        const auto c = static_cast<std::size_t>(l);
        if (p.contains(l) && g.contains(l)) ++tp[c];
        else if (p.contains(l)) ++fp[c];
        else if (g.contains(l)) ++fn[c];
      }
    }
    if (n == 0) throw ArgumentError("annotator " + gold.annotator_ids()[j] + " has no observed pairs");
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t c = 0; c < corpus::kNumLabels; ++c) {
      const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
      if (denom == 0) {
        if (policy == UndefinedClassPolicy::kZero) ++included;
        continue;
      }
      sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
      ++included;
    }
    if (included == 0) {
      throw ArgumentError("macro-F1 undefined for annotator " + gold.annotator_ids()[j]);
    }
    out.push_back(sum / static_cast<double>(included));
  }
  return out;
}

double macro_f1_aggregated(std::span<const LabelSet> preds, const AnnotationTensor& gold,
                           UndefinedClassPolicy policy) {
  const auto per = macro_f1_per_annotator(preds, gold, policy);
  double s = 0.0;
  for (double v : per) s += v;
  return s / static_cast<double>(per.size());
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto ref = text::tokenize(reference);
  if (ref.empty()) throw ArgumentError("ROUGE-L with an empty reference");
  const auto cand = text::tokenize(candidate);
  if (cand.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(cand, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

double cosine01(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ArgumentError("cosine of mismatched vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine of a zero vector");
  const double cos = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
  return (cos + 1.0) / 2.0;
}

Histogram summarize(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("histogram of no scores");
  std::vector<double> s(scores.begin(), scores.end());
  for (double v : s) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("score outside [0, 1]: " + std::to_string(v));
  }
  std::sort(s.begin(), s.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (s[hi] - s[lo]) * (pos - static_cast<double>(lo));
  };
  Histogram h;
  h.median = quantile(0.5);
  h.q1 = quantile(0.25);
  h.q3 = quantile(0.75);
  for (double v : s) ++h.counts[std::min<std::size_t>(9, static_cast<std::size_t>(v * 10.0))];
  h.total = s.size();
  return h;
}

nlohmann::json to_json(const Histogram& h) {
  return {{"median", h.median}, {"q1", h.q1}, {"q3", h.q3}, {"bins", h.counts}, {"total", h.total}};
}

EvalReport make_eval_report(std::vector<AnnotatorRow> rows, std::string threshold_mode) {
  if (rows.empty()) throw ArgumentError("evaluation report without annotators");
  EvalReport r;
  r.threshold_mode = std::move(threshold_mode);
  r.aggregated.annotator_id = "aggregated";
  const auto n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    r.aggregated.macro_f1 += row.macro_f1 / n;
    r.aggregated.exact_match += row.exact_match / n;
    r.aggregated.rouge_l += row.rouge_l / n;
    r.aggregated.semantic_similarity += row.semantic_similarity / n;
    r.aggregated.pairs += row.pairs;
  }
  r.evaluated_pairs = r.aggregated.pairs;
  r.rows = std::move(rows);
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  auto row_json = [](const AnnotatorRow& row) {
    return nlohmann::json{{"annotator", row.annotator_id},
                          {"macro_f1", row.macro_f1},
                          {"exact_match", row.exact_match},
                          {"rouge_l", row.rouge_l},
                          {"semantic_similarity", row.semantic_similarity},
                          {"pairs", row.pairs}};
  };
  nlohmann::json per = nlohmann::json::array();
  for (const auto& row : r.rows) per.push_back(row_json(row));
  return {{"threshold_mode", r.threshold_mode},
          {"evaluated_pairs", r.evaluated_pairs},
          {"aggregated", row_json(r.aggregated)},
          {"per_annotator", per}};
}

}  // namespace perspex::metrics
