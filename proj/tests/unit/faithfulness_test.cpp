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

#include <algorithm>

#include "perspex/error.hpp"
#include "perspex/faithfulness.hpp"
#include "perspex/synth.hpp"
#include "fixtures.hpp"

using namespace perspex::metrics;
using perspex::corpus::Split;
using perspex::explainer::Explainer;
using perspex::explainer::ExplainerMode;
using perspex::explainer::GeneratedExplanation;
using perspex::passport::MetadataFeaturizer;
using perspex::passport::PassportClassifier;

namespace {

struct Toy {
  perspex::corpus::Corpus corpus = perspex::testing::tiny_corpus();
  perspex::text::Vocab vocab = perspex::text::build_vocab(corpus, 1);
  perspex::tc::ModelConfig cfg = perspex::testing::toy_config();
  PassportClassifier judge{cfg, vocab.size(), corpus.annotators(), MetadataFeaturizer::from_corpus(corpus)};
  Explainer embedder{cfg, vocab.size(), ExplainerMode::kPosthoc, 0};
};

GeneratedExplanation gen(std::string inst, std::string ann, std::string text, bool empty = false) {
  GeneratedExplanation g;
  g.instance_id = std::move(inst);
  g.annotator_id = std::move(ann);
  g.text = std::move(text);
  g.empty = empty;
  g.token_count = perspex::text::tokenize(g.text).size();
  return g;
}

double manual_cosine01(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return (dot / std::sqrt(na * nb) + 1) / 2;
}

}  // namespace

TEST(Semantic, IdenticalTextsScoreOne) {
  Toy t;
  EXPECT_NEAR(semantic_similarity(t.embedder, t.vocab, "he performs music", "he performs music"), 1.0, 1e-12);
  EXPECT_THROW(semantic_similarity(t.embedder, t.vocab, "", "x"), perspex::ArgumentError);
}

TEST(Semantic, EmbeddingProbeIsOrderInvariant) {
  Toy t;
  EXPECT_NEAR(semantic_similarity(t.embedder, t.vocab, "a man plays guitar", "guitar plays man a", true), 1.0,
              1e-12);
  EXPECT_LT(semantic_similarity(t.embedder, t.vocab, "a man plays guitar", "guitar plays man a", false), 1.0);
}

TEST(Semantic, EqualsRecomputationFromExportedVectors) {
  Toy t;
  const char* pairs[][2] = {{"he performs", "guitar is music"}, {"running is not sleeping", "could be a rehearsal"}};
  for (const auto& p : pairs) {
    const auto a = embed_text(t.embedder, t.vocab, p[0]);
    const auto b = embed_text(t.embedder, t.vocab, p[1]);
    EXPECT_EQ(a.size(), static_cast<std::size_t>(t.cfg.d_model));
    EXPECT_NEAR(semantic_similarity(t.embedder, t.vocab, p[0], p[1]), manual_cosine01(a, b), 1e-12);
  }
}

TEST(BestRouge, MaximumOverReferences) {
  const std::vector<std::string> refs{"guitar is music", "maybe he is tuning it"};
  EXPECT_DOUBLE_EQ(best_rouge_l("maybe he is tuning it", refs), 1.0);
  EXPECT_NEAR(best_rouge_l("guitar music", refs), rouge_l("guitar music", refs[0]), 1e-15);
  EXPECT_THROW(best_rouge_l("x", std::vector<std::string>{}), perspex::ArgumentError);
}

TEST(Report, EmptyGenerationsExcludedAndCounted) {
  Toy t;
  const std::vector<GeneratedExplanation> gens{gen("i1", "Ann1", "playing guitar on stage is performing ."),
                                               gen("i1", "Ann2", "", true), gen("i2", "Ann3", "they sleep")};
  const auto r = faithfulness_report(gens, t.corpus, t.judge, t.embedder, t.vocab);
  EXPECT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.excluded, 1u);
  for (const auto* h : {&r.semantic_similarity, &r.rouge_l, &r.entailment}) {
    std::size_t sum = 0;
    for (auto c : h->counts) sum += c;
    EXPECT_EQ(sum, r.items.size());
  }
  for (const auto& it : r.items) {
    for (double v : {it.semantic_similarity, it.rouge_l, it.entailment}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_DOUBLE_EQ(r.items[0].rouge_l, 1.0);
  const auto j = to_json(r);
  EXPECT_EQ(j["excluded"], 1);
  EXPECT_EQ(j["included"], 2);
}

TEST(Report, MissingJudgmentIsAnAlignmentError) {
  Toy t;
  const std::vector<GeneratedExplanation> gens{gen("i2", "Ann2", "text")};
  EXPECT_THROW(faithfulness_report(gens, t.corpus, t.judge, t.embedder, t.vocab), perspex::AlignmentError);
  const std::vector<GeneratedExplanation> all_empty{gen("i1", "Ann1", "", true)};
  EXPECT_THROW(faithfulness_report(all_empty, t.corpus, t.judge, t.embedder, t.vocab), perspex::ArgumentError);
}

TEST(Entailment, ScoreIsTheAnnotatorMeanOfPE) {
  Toy t;
  const auto& inst = *t.corpus.find_instance("i1");
  const auto ids = perspex::text::encode(inst.context + " " + inst.statement + " | he performs", t.vocab,
                                         static_cast<std::size_t>(t.cfg.max_len_classifier), true);
  double mean = 0;
  const auto probs = t.judge.predict(ids);
  for (const auto& p : probs) mean += p[1] / static_cast<double>(probs.size());
  EXPECT_NEAR(entailment_score(t.judge, t.vocab, inst, "he performs"), mean, 1e-12);
}

TEST(Entailment, CopiedHighEntailmentRationaleScoresAboveMedian) {
  auto spec = perspex::synth::SyntheticSpec::defaults();
  spec.n_instances = 60;
  const auto synth = perspex::synth::generate(spec);
  const auto vocab = perspex::text::build_vocab(synth.corpus, 1);
  auto mcfg = perspex::testing::toy_config();
  mcfg.d_model = 16;
  mcfg.ffn_dim = 32;
  auto tcfg = perspex::tc::TrainConfig::classifier_defaults();
  tcfg.epochs = 30;
  tcfg.patience = 30;
  tcfg.batch_size = 8;
  tcfg.lr_multiplier = 150;
  const auto trained = perspex::passport::train_classifier(synth.corpus, vocab, mcfg, tcfg);

  std::vector<double> scores;
  double best = -1;
  std::string best_text;
  const perspex::corpus::Instance* best_inst = nullptr;
  for (const auto* inst : synth.corpus.instances_in(Split::kTrain)) {
    for (const auto& j : inst->judgments) {
      for (const auto& p : j.pairs) {
        const double s = entailment_score(trained.model, vocab, *inst, p.rationale);
        scores.push_back(s);
        if (p.label == perspex::corpus::Label::kE && s > best) {
          best = s;
          best_text = p.rationale;
          best_inst = inst;
        }
      }
    }
  }
  ASSERT_NE(best_inst, nullptr);
  std::nth_element(scores.begin(), scores.begin() + static_cast<long>(scores.size() / 2), scores.end());
  const double median = scores[scores.size() / 2];
  EXPECT_GT(entailment_score(trained.model, vocab, *best_inst, best_text), median);
}

TEST(Evaluate, EmptyGenerationsScoreZeroAndRowsAverage) {
  Toy t;
  auto dump = perspex::passport::predict_split(t.judge, t.vocab, t.corpus, Split::kTrain);
  perspex::calibrate::ThresholdConfig th;
  const std::vector<GeneratedExplanation> gens{gen("i1", "Ann3", "he performs ."), gen("i1", "Ann4", "", true)};
  const auto r = evaluate(t.corpus, Split::kTrain, dump, th, gens, t.embedder, t.vocab);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(r.rows[2].rouge_l, 1.0);
  EXPECT_DOUBLE_EQ(r.rows[3].rouge_l, 0.0);
  EXPECT_DOUBLE_EQ(r.rows[3].semantic_similarity, 0.0);
  double mean = 0;
  for (const auto& row : r.rows) mean += row.rouge_l / 4;
  EXPECT_NEAR(r.aggregated.rouge_l, mean, 1e-12);
  EXPECT_EQ(r.evaluated_pairs, 4u);
}

TEST(Evaluate, MisalignedInputsAreRejected) {
  Toy t;
  auto dump = perspex::passport::predict_split(t.judge, t.vocab, t.corpus, Split::kTrain);
  perspex::calibrate::ThresholdConfig th;
  EXPECT_THROW(evaluate(t.corpus, Split::kDev, dump, th, {}, t.embedder, t.vocab), perspex::AlignmentError);
  const std::vector<GeneratedExplanation> wrong_split{gen("i2", "Ann1", "x")};
  EXPECT_THROW(evaluate(t.corpus, Split::kTrain, dump, th, wrong_split, t.embedder, t.vocab),
               perspex::AlignmentError);
  dump.instance_ids[0] = "renamed";
  EXPECT_THROW(evaluate(t.corpus, Split::kTrain, dump, th, {}, t.embedder, t.vocab), perspex::AlignmentError);
}
