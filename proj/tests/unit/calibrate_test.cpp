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

#include "perspex/calibrate.hpp"
#include "perspex/error.hpp"
#include "perspex/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace perspex::calibrate;
using perspex::corpus::AnnotationTensor;
using perspex::corpus::LabelSet;

TEST(Decision, ThresholdsAndArgmaxFallback) {
  const std::array<double, 3> half{0.5, 0.5, 0.5};
  EXPECT_EQ(predict_label_set({0.2, 0.8, 0.4}, half).to_string(), "E");
  EXPECT_EQ(predict_label_set({0.1, 0.1, 0.1}, half).to_string(), "C");
  EXPECT_EQ(predict_label_set({0.6, 0.7, 0.1}, half).to_string(), "C E");
  EXPECT_EQ(predict_label_set({0.5, 0.2, 0.3}, half).to_string(), "C");  // >= at the boundary
  EXPECT_EQ(predict_label_set({0.2, 0.3, 0.45}, half).to_string(), "N");
}

TEST(Decision, NeverEmpty) {
  std::mt19937_64 rng(5);
  const auto probs = perspex::testing::random_probs(500, rng);
  for (const auto& p : probs) EXPECT_GT(predict_label_set(p, {0.9, 0.9, 0.9}).size(), 0u);
}

TEST(Grid, SeventeenPoints) {
  const auto g = threshold_grid(0.05);
  ASSERT_EQ(g.size(), 17u);
  EXPECT_DOUBLE_EQ(g.front(), 0.1);
  EXPECT_DOUBLE_EQ(g.back(), 0.9);
  EXPECT_NEAR(g[8], 0.5, 1e-15);
  EXPECT_THROW(threshold_grid(0.07), perspex::ArgumentError);
  EXPECT_THROW(threshold_grid(0.0), perspex::ArgumentError);
}

TEST(Config, ValidationAndJson) {
  ThresholdConfig c;
  c.tau = {0.35, 0.5, 0.4};
  const auto back = threshold_config_from_json(to_json(c));
  EXPECT_EQ(back.tau, c.tau);
  EXPECT_EQ(back.mode, ThresholdMode::kPerClass);
  c.tau[0] = 0.95;
  EXPECT_THROW(c.validate(), perspex::ArgumentError);
  EXPECT_THROW(threshold_config_from_json({{"tau", 1}}), perspex::ArtifactError);
  EXPECT_THROW(parse_mode("both"), perspex::ArgumentError);
}

TEST(Tuner, PerfectlySeparatedPicksTheSmallestGridPoint) {
  AnnotationTensor gold({"a", "b", "c"}, {"x"});
  gold.set(0, 0, LabelSet::from_bits(1));
  gold.set(1, 0, LabelSet::from_bits(6));
  gold.set(2, 0, LabelSet::from_bits(2));
  const std::vector<ClassProbabilities> probs{{0.95, 0.02, 0.03}, {0.01, 0.97, 0.99}, {0.05, 0.99, 0.0}};
  const auto r = tune_thresholds(probs, gold);
  EXPECT_EQ(r.config.tau, (std::array<double, 3>{0.1, 0.1, 0.1}));
  EXPECT_DOUBLE_EQ(r.mean_jaccard, 1.0);
  EXPECT_EQ(r.points_evaluated, 17u * 17u * 17u);
}

TEST(Tuner, GlobalIsPerClassRestrictedToTheDiagonal) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto gold = perspex::testing::random_tensor(25, 4, 0.7, rng);
    const auto probs = perspex::testing::random_probs(100, rng);
    const auto global = tune_thresholds(probs, gold, ThresholdMode::kGlobal);
    EXPECT_EQ(global.points_evaluated, 17u);
    const auto brute = perspex::oracle::brute_force_tune(probs, gold, true);
    EXPECT_EQ(global.config.tau, brute.tau);
    EXPECT_NEAR(global.mean_jaccard, brute.score, 1e-12);
    EXPECT_EQ(global.config.tau[0], global.config.tau[1]);
    const auto per = tune_thresholds(probs, gold, ThresholdMode::kPerClass);
    EXPECT_GE(per.mean_jaccard, global.mean_jaccard - 1e-12);
  }
}

TEST(Tuner, ObjectiveEqualsMeanJaccard) {
  std::mt19937_64 rng(8);
  const auto gold = perspex::testing::random_tensor(30, 4, 0.6, rng);
  const auto probs = perspex::testing::random_probs(120, rng);
  const auto r = tune_thresholds(probs, gold);
  const auto preds = predict_all(probs, r.config.tau);
  EXPECT_NEAR(r.mean_jaccard, perspex::metrics::mean_jaccard(preds, gold), 1e-12);
}

TEST(Tuner, MatchesBruteForceIncludingTies) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const auto gold = perspex::testing::random_tensor(12, 4, 0.5, rng);
    const auto probs = perspex::testing::random_probs(48, rng);
    const auto r = tune_thresholds(probs, gold);
    const auto b = perspex::oracle::brute_force_tune(probs, gold, false);
    EXPECT_EQ(r.config.tau, b.tau);
    EXPECT_NEAR(r.mean_jaccard, b.score, 1e-12);
  }
}

TEST(Tuner, RejectsMisalignedDumps) {
  AnnotationTensor gold({"a"}, {"x", "y"});
  gold.set(0, 0, LabelSet::from_bits(1));
  const std::vector<ClassProbabilities> probs{{0.5, 0.5, 0.5}};
  EXPECT_THROW(tune_thresholds(probs, gold), perspex::ArgumentError);
}
