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

#include "perspex/corpus.hpp"
#include "perspex/error.hpp"
#include "perspex/synth.hpp"

using namespace perspex::synth;
using perspex::corpus::Label;
using perspex::corpus::Split;

TEST(Synthetic, DefaultSpecGivesEightHundredJudgments) {
  const auto s = generate(SyntheticSpec::defaults());
  EXPECT_EQ(s.corpus.instances().size(), 200u);
  EXPECT_EQ(s.corpus.judgment_count(), 800u);
  EXPECT_DOUBLE_EQ(audit_labels(s.corpus, s.answer_key), 1.0);
  EXPECT_TRUE(audit_stats(s.corpus, s.answer_key).empty());
  for (auto split : perspex::corpus::kAllSplits) EXPECT_FALSE(s.corpus.instances_in(split).empty());
}

TEST(Synthetic, SameSeedSameBytes) {
  const auto a = generate(SyntheticSpec::defaults());
  const auto b = generate(SyntheticSpec::defaults());
  EXPECT_EQ(perspex::corpus::serialize_corpus(a.corpus), perspex::corpus::serialize_corpus(b.corpus));
  EXPECT_EQ(a.answer_key.dump(), b.answer_key.dump());
  auto other = SyntheticSpec::defaults();
  other.seed = 8;
  EXPECT_NE(perspex::corpus::serialize_corpus(generate(other).corpus), perspex::corpus::serialize_corpus(a.corpus));
}

TEST(Synthetic, RationalesFollowTheTemplates) {
  const auto spec = SyntheticSpec::defaults();
  const auto s = generate(spec);
  std::map<std::string, std::string> cue_of;
  for (const auto& rec : s.answer_key.at("instances")) cue_of[rec.at("id")] = rec.at("cue");
  for (const auto& inst : s.corpus.instances()) {
    const std::string& cue = cue_of.at(inst.id);
    EXPECT_NE(inst.context.find(cue), std::string::npos) << inst.id;
    for (const auto& j : inst.judgments) {
      const auto& persona = *std::find_if(spec.personas.begin(), spec.personas.end(),
                                          [&](const Persona& p) { return p.profile.id == j.annotator_id; });
      for (const auto& pair : j.pairs) EXPECT_EQ(pair.rationale, render_rationale(persona, pair.label, cue));
    }
  }
  EXPECT_EQ(render_rationale(spec.personas[3], Label::kE, "rain"), "given rain the claim must be true");
}

TEST(Synthetic, AuditCatchesTampering) {
  const auto s = generate(SyntheticSpec::defaults());
  auto key = s.answer_key;
  auto& labels = key["instances"][0]["labels"];
  const std::string first = labels.begin().key();
  labels[first] = labels[first].get<std::string>() == "C" ? "E" : "C";
  EXPECT_LT(audit_labels(s.corpus, key), 1.0);
  auto stats_key = s.answer_key;
  stats_key["expected_stats"]["train"]["annotations"] = 1;
  EXPECT_FALSE(audit_stats(s.corpus, stats_key).empty());
}

TEST(SpecJson, StrictAndRoundTrips) {
  const auto spec = SyntheticSpec::defaults();
  const auto back = spec_from_json(spec_to_json(spec));
  EXPECT_EQ(spec_to_json(back).dump(), spec_to_json(spec).dump());
  EXPECT_THROW(spec_from_json({{"n_instance", 10}}), perspex::ArgumentError);
  const auto small = spec_from_json({{"n_instances", 20}, {"seed", 3}});
  EXPECT_EQ(small.n_instances, 20u);
  EXPECT_EQ(generate(small).corpus.instances().size(), 20u);
}

TEST(SpecValidation, RejectsBrokenSpecs) {
  auto bad_ratio = SyntheticSpec::defaults();
  bad_ratio.split_ratios = {0.5, 0.2, 0.2};
  EXPECT_THROW(bad_ratio.validate(), perspex::ArgumentError);
  auto no_cue = SyntheticSpec::defaults();
  no_cue.personas[0].templates["E"] = "no placeholder here";
  EXPECT_THROW(no_cue.validate(), perspex::ArgumentError);
  auto repeated = SyntheticSpec::defaults();
  repeated.personas[1].templates["N"] = repeated.personas[1].templates["E"];
  EXPECT_THROW(repeated.validate(), perspex::ArgumentError);
  auto unknown = SyntheticSpec::defaults();
  unknown.personas[0].rules = {{"volcano", "E"}};
  EXPECT_THROW(unknown.validate(), perspex::ArgumentError);
}

TEST(Memorization, DevMirrorsTrain) {
  const auto c = memorization_corpus(16, 11);
  const auto train = c.instances_in(Split::kTrain);
  const auto dev = c.instances_in(Split::kDev);
  ASSERT_EQ(train.size(), 16u);
  ASSERT_EQ(dev.size(), 16u);
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(train[i]->context, dev[i]->context);
    EXPECT_EQ(train[i]->judgments.size(), 1u);
    EXPECT_EQ(train[i]->judgments[0].label_set(), dev[i]->judgments[0].label_set());
  }
  EXPECT_THROW(memorization_corpus(0), perspex::ArgumentError);
}
