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

#include <gtest/gtest.h>

#include "perspex/error.hpp"
#include "perspex/metrics.hpp"
#include "perspex/text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace perspex::metrics;
using perspex::corpus::LabelSet;

namespace {

const LabelSet C = LabelSet::from_bits(1), E = LabelSet::from_bits(2), N = LabelSet::from_bits(4);
const LabelSet EN = LabelSet::from_bits(6);

}  // namespace

TEST(Jaccard, ReferenceValues) {
  EXPECT_DOUBLE_EQ(jaccard(E, E), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(E, EN), 0.5);
  EXPECT_DOUBLE_EQ(jaccard(C, EN), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(LabelSet::from_bits(3), LabelSet::from_bits(6)), 1.0 / 3.0);
  for (std::uint8_t a = 0; a < 8; ++a) {
    for (std::uint8_t b = 0; b < 8; ++b) {
      EXPECT_EQ(jaccard(LabelSet::from_bits(a), LabelSet::from_bits(b)),
                jaccard(LabelSet::from_bits(b), LabelSet::from_bits(a)));
    }
  }
}

TEST(ExactMatch, OneOfFourDiffers) {
  AnnotationTensor gold({"i"}, {"a", "b", "c", "d"});
  for (std::size_t j = 0; j < 4; ++j) gold.set(0, j, E);
  const std::vector<LabelSet> preds{E, E, EN, E};
  EXPECT_DOUBLE_EQ(exact_match_rate(preds, gold), 0.75);
  EXPECT_EQ(exact_match_per_annotator(preds, gold), (std::vector<double>{1, 1, 0, 1}));
}

TEST(ExactMatch, UnobservedCellsIgnored) {
  AnnotationTensor gold({"i", "k"}, {"a"});
  gold.set(0, 0, E);
  const std::vector<LabelSet> preds{E, C};
  EXPECT_DOUBLE_EQ(exact_match_rate(preds, gold), 1.0);
  EXPECT_DOUBLE_EQ(mean_jaccard(preds, gold), 1.0);
  EXPECT_THROW(exact_match_rate(std::vector<LabelSet>{E}, gold), perspex::ArgumentError);
}

TEST(MacroF1, PerfectAndComplement) {
  AnnotationTensor gold({"x", "y", "z"}, {"a"});
  gold.set(0, 0, C);
  gold.set(1, 0, EN);
  gold.set(2, 0, E);
  const std::vector<LabelSet> perfect{C, EN, E};
  EXPECT_DOUBLE_EQ(macro_f1_aggregated(perfect, gold), 1.0);
  const std::vector<LabelSet> complement{EN, C, LabelSet::from_bits(5)};
  EXPECT_DOUBLE_EQ(macro_f1_aggregated(complement, gold), 0.0);
}

TEST(MacroF1, UndefinedClassesExcludedOrZeroed) {
  AnnotationTensor gold({"x"}, {"a"});
  gold.set(0, 0, E);
  const std::vector<LabelSet> preds{E};
  EXPECT_DOUBLE_EQ(macro_f1_aggregated(preds, gold), 1.0);
  EXPECT_DOUBLE_EQ(macro_f1_aggregated(preds, gold, UndefinedClassPolicy::kZero), 1.0 / 3.0);
  AnnotationTensor unseen({"x"}, {"a", "b"});
  unseen.set(0, 0, E);
  EXPECT_THROW(macro_f1_aggregated(std::vector<LabelSet>{E, E}, unseen), perspex::ArgumentError);
}

TEST(LabelMetrics, AgreeWithOracles) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng), a = dim(rng);
    const auto gold = perspex::testing::random_tensor(n, a, 0.6, rng);
    const auto preds = perspex::testing::random_sets(n * a, rng);
    ASSERT_NEAR(mean_jaccard(preds, gold), perspex::oracle::mean_jaccard(preds, gold), 1e-9);
    ASSERT_NEAR(exact_match_rate(preds, gold), perspex::oracle::exact_match(preds, gold), 1e-9);
    const auto f1 = macro_f1_per_annotator(preds, gold);
    const auto ref = perspex::oracle::macro_f1(preds, gold);
    ASSERT_EQ(f1.size(), ref.size());
    for (std::size_t j = 0; j < f1.size(); ++j) ASSERT_NEAR(f1[j], ref[j], 1e-9);
  }
}

TEST(Rouge, HandExample) {
  EXPECT_NEAR(rouge_l("a b c d", "a c e"), 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(rouge_l("a b c d", "a c e"), 0.5714, 1e-4);
  EXPECT_DOUBLE_EQ(rouge_l("The cat sat.", "the cat sat ."), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l("x y", "a b"), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l("", "a b"), 0.0);
  EXPECT_THROW(rouge_l("a", ""), perspex::ArgumentError);
}

TEST(Rouge, SwappingArgumentsSwapsPrecisionAndRecall) {
  const auto a = perspex::text::tokenize("a b c d"), b = perspex::text::tokenize("a c e");
  const double l = static_cast<double>(lcs_length(a, b));
  EXPECT_EQ(lcs_length(a, b), lcs_length(b, a));
  const double p_ab = l / a.size(), r_ab = l / b.size();
  const double p_ba = l / b.size(), r_ba = l / a.size();
  EXPECT_NE(p_ab, r_ab);
  EXPECT_EQ(p_ab, r_ba);
  EXPECT_EQ(r_ab, p_ba);
  // The balanced F-measure is the harmonic mean, so the score itself is unchanged.
  EXPECT_NEAR(rouge_l("a b c d", "a c e"), rouge_l("a c e", "a b c d"), 1e-15);
}

TEST(Rouge, AgreesWithTableOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(1, 9), word(0, 4);
  const char* words[] = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> x(len(rng)), y(len(rng));
    for (auto& w : x) w = words[word(rng)];
    for (auto& w : y) w = words[word(rng)];
    std::string xs, ys;
    for (const auto& w : x) xs += w + " ";
    for (const auto& w : y) ys += w + " ";
    ASSERT_EQ(lcs_length(x, y), perspex::oracle::lcs(x, y));
    ASSERT_NEAR(rouge_l(xs, ys), perspex::oracle::rouge_l(x, y), 1e-9);
  }
}

TEST(Cosine, MappedToUnitInterval) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{-1, 0};
  EXPECT_DOUBLE_EQ(cosine01(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine01(a, b), 0.5);
  EXPECT_DOUBLE_EQ(cosine01(a, c), 0.0);
  EXPECT_THROW(cosine01(a, std::vector<double>{0, 0}), perspex::ArgumentError);
}

TEST(Histogram, BinsQuartilesAndTotals) {
  const std::vector<double> s{0.0, 0.05, 0.1, 0.45, 0.5, 0.99, 1.0};
  const auto h = summarize(s);
  EXPECT_EQ(h.total, 7u);
  EXPECT_EQ(h.counts[0], 2u);
  EXPECT_EQ(h.counts[1], 1u);
  EXPECT_EQ(h.counts[4], 1u);
  EXPECT_EQ(h.counts[5], 1u);
  EXPECT_EQ(h.counts[9], 2u);
  std::size_t sum = 0;
  for (auto c : h.counts) sum += c;
  EXPECT_EQ(sum, h.total);
  EXPECT_DOUBLE_EQ(h.median, 0.45);
  EXPECT_LE(h.q1, h.median);
  EXPECT_LE(h.median, h.q3);
  EXPECT_THROW(summarize(std::vector<double>{1.5}), perspex::ArgumentError);
  EXPECT_THROW(summarize(std::vector<double>{}), perspex::ArgumentError);
}

TEST(Report, AggregateIsTheUnweightedMean) {
  std::vector<AnnotatorRow> rows{{"A", 0.5, 0.25, 0.8, 0.9, 10}, {"B", 1.0, 0.75, 0.4, 0.7, 30}};
  const auto r = make_eval_report(rows, "per_class");
  EXPECT_NEAR(r.aggregated.macro_f1, 0.75, 1e-12);
  EXPECT_NEAR(r.aggregated.exact_match, 0.5, 1e-12);
  EXPECT_NEAR(r.aggregated.rouge_l, 0.6, 1e-12);
  EXPECT_NEAR(r.aggregated.semantic_similarity, 0.8, 1e-12);
  EXPECT_EQ(r.evaluated_pairs, 40u);
  const auto j = to_json(r);
  EXPECT_EQ(j["per_annotator"].size(), 2u);
  EXPECT_EQ(j["aggregated"]["annotator"], "aggregated");
  EXPECT_THROW(make_eval_report({}, "global"), perspex::ArgumentError);
}
