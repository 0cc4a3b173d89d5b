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

#include <cmath>
#include <numeric>

#include "perspex/error.hpp"
#include "perspex/passport.hpp"
#include "perspex/synth.hpp"
#include "fixtures.hpp"

using namespace perspex::passport;
using perspex::corpus::AnnotationTensor;
using perspex::corpus::LabelSet;
using perspex::tc::Matrix;
using perspex::tc::Var;

namespace {

Var row(std::initializer_list<double> v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.values().begin());
  return Var::constant(std::move(m));
}

double binary_entropy_cross(double p, double s) { return -(s * std::log(p) + (1 - s) * std::log(1 - p)); }

struct Toy {
  perspex::corpus::Corpus corpus = perspex::synth::memorization_corpus(6, 3);
  perspex::text::Vocab vocab = perspex::text::build_vocab(corpus, 1);
  PassportClassifier model{perspex::testing::toy_config(), vocab.size(), corpus.annotators(),
                           MetadataFeaturizer::from_corpus(corpus)};
  std::vector<std::vector<int>> inputs;
  AnnotationTensor tensor = perspex::corpus::build_annotation_tensor(corpus, perspex::corpus::Split::kTrain);

  Toy() {
    for (const auto* inst : corpus.instances_in(perspex::corpus::Split::kTrain)) {
      inputs.push_back(classifier_input(*inst, vocab, 64));
    }
  }
};

std::vector<Matrix> grads(const perspex::tc::ParamStore& store) {
  std::vector<Matrix> out;
  for (const auto& p : store.params()) out.push_back(p.var.has_grad() ? p.var.grad() : Matrix());
  return out;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  return std::equal(a.values().begin(), a.values().end(), b.values().begin(),
                    [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
}

}  // namespace

TEST(Fusion, ConcatenatesInOrder) {
  const Var z = fuse_parts(row({1, 2}), row({3, 4}), row({5, 6}));
  ASSERT_EQ(z.cols(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(z.value()(0, i), static_cast<double>(i + 1));
}

TEST(Featurizer, OneHotsAndScaledAge) {
  const auto c = perspex::testing::tiny_corpus();
  const auto f = MetadataFeaturizer::from_corpus(c);
  const auto young = f.features(c.annotator("Ann1"));
  const auto old = f.features(c.annotator("Ann2"));
  EXPECT_EQ(young.size(), f.dim());
  EXPECT_DOUBLE_EQ(young.back(), 0.0);
  EXPECT_DOUBLE_EQ(old.back(), 1.0);
  EXPECT_DOUBLE_EQ(std::accumulate(young.begin(), young.end() - 1, 0.0), 3.0);
  EXPECT_EQ(MetadataFeaturizer::from_json(f.to_json()).features(c.annotator("Ann4")), f.features(c.annotator("Ann4")));
}

TEST(Head, ZeroWeightsGiveOneHalf) {
  Toy t;
  for (auto* lin : {&t.model.head_hidden, &t.model.head_out}) {
    lin->weight.mutable_value().fill(0.0);
    lin->bias.mutable_value().fill(0.0);
  }
  for (const auto& probs : t.model.predict(t.inputs[0])) {
    for (double p : probs) EXPECT_EQ(p, 0.5);
  }
}

TEST(Head, SigmoidValues) {
  const Var p = perspex::tc::sigmoid(row({10, -10, 0}));
  EXPECT_NEAR(p.value()(0, 0), 0.99995, 1e-5);
  EXPECT_NEAR(p.value()(0, 1), 0.00005, 1e-5);
  EXPECT_EQ(p.value()(0, 2), 0.5);
}

TEST(Focal, ReferenceValues) {
  EXPECT_NEAR(focal_term(0.5, 1, 1.0, 0.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(focal_term(0.9, 1, 1.0, 2.0), 0.0010536, 1e-7);
  EXPECT_NEAR(focal_term(0.9, 0, 3.0, 2.0), 0.81 * -std::log(0.1), 1e-12);
}

TEST(Focal, MaskedCellsHaveNoInfluence) {
  Matrix logits(2, 3);
  logits(0, 0) = 0.3;
  logits(0, 1) = -1.2;
  logits(0, 2) = 2.0;
  logits(1, 0) = 5.0;
  Matrix labels(2, 3);
  labels(0, 1) = 1;
  const std::uint8_t mask[] = {1, 0};
  const ClassWeights alpha{2.0, 1.0, 0.5};
  const Var x = Var::parameter(logits);
  const Var loss = masked_focal_bce(x, labels, mask, alpha, 2.0);
  const double expected = focal_term(1 / (1 + std::exp(-0.3)), 0, 2.0, 2.0) +
                          focal_term(1 / (1 + std::exp(1.2)), 1, 1.0, 2.0) +
                          focal_term(1 / (1 + std::exp(-2.0)), 0, 0.5, 2.0);
  EXPECT_NEAR(loss.scalar(), expected, 1e-12);
  perspex::tc::backward(loss);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(x.grad()(1, c), 0.0);
  const std::uint8_t none[] = {0, 0};
  EXPECT_THROW(masked_focal_bce(x, labels, none, alpha, 2.0), perspex::ArgumentError);
}

TEST(ClassWeights, RatioAndClamp) {
  AnnotationTensor half({"a", "b"}, {"x"});
  half.set(0, 0, LabelSet::from_bits(7));
  half.set(1, 0, LabelSet::from_bits(1));
  half.poke_label(1, 0, 0, 0);
  for (double a : compute_class_weights(half)) EXPECT_DOUBLE_EQ(a, 1.0);

  std::vector<std::string> ids(1505);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "i" + std::to_string(i);
  AnnotationTensor big(ids, {"x"});
  for (std::size_t i = 0; i < ids.size(); ++i) big.set(i, 0, LabelSet::from_bits(i < 292 ? 7 : 6));
  EXPECT_NEAR(compute_class_weights(big)[0], 1213.0 / 292.0, 1e-12);
  EXPECT_NEAR(compute_class_weights(big)[0], 4.15, 0.01);

  std::vector<std::string> k(1000);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = "k" + std::to_string(i);
  AnnotationTensor rare(k, {"x"});
  for (std::size_t i = 0; i < k.size(); ++i) rare.set(i, 0, LabelSet::from_bits(i == 0 ? 7 : 6));
  EXPECT_DOUBLE_EQ(compute_class_weights(rare)[0], 10.0);

  AnnotationTensor never({"a"}, {"x"});
  never.set(0, 0, LabelSet::from_bits(2));
  EXPECT_THROW(compute_class_weights(never), perspex::ArgumentError);
}

TEST(EarlyStopping, PatienceThree) {
  EarlyStopper s(3);
  const double seq[] = {0.5, 0.6, 0.6, 0.6, 0.6};
  std::vector<bool> stops;
  for (double m : seq) stops.push_back(s.update(m));
  EXPECT_EQ(stops, (std::vector<bool>{false, false, false, false, true}));
  EXPECT_EQ(s.best_epoch(), 2);
  EXPECT_DOUBLE_EQ(s.best_metric(), 0.6);
  EXPECT_THROW(EarlyStopper(0), perspex::ArgumentError);
}

TEST(SoftAlignment, MinimumIsTheEntropyFloor) {
  // Two annotators, both observed, whose mean probability equals the target.
  Matrix p(2, 3);
  p(0, 0) = 0.2;
  p(0, 1) = 0.6;
  p(0, 2) = 0.9;
  p(1, 0) = 0.4;
  p(1, 1) = 0.4;
  p(1, 2) = 0.5;
  const std::uint8_t mask[] = {1, 1};
  const perspex::corpus::SoftTarget soft[] = {{0.3, 0.5, 0.7}};
  const Var probs = Var::parameter(p);
  const Var loss = soft_alignment_loss(probs, mask, 2, soft);
  double floor = 0;
  for (double s : soft[0]) floor += binary_entropy_cross(s, s);
  EXPECT_NEAR(loss.scalar(), floor, 1e-12);
  perspex::tc::backward(loss);
  for (double g : probs.grad().values()) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(SoftAlignment, UnobservedAnnotatorIgnored) {
  Matrix p(2, 3, 0.5);
  p(1, 0) = 0.01;
  const std::uint8_t mask[] = {1, 0};
  const perspex::corpus::SoftTarget soft[] = {{0.5, 0.5, 0.5}};
  const Var loss = soft_alignment_loss(Var::constant(p), mask, 2, soft);
  EXPECT_NEAR(loss.scalar(), 3 * std::log(2.0), 1e-12);
}

TEST(Objective, DecomposesIntoFocalPlusLambdaAlignment) {
  Toy t;
  const auto soft = perspex::corpus::soft_targets(t.tensor);
  const ClassWeights alpha{1.5, 0.7, 3.0};
  std::vector<std::size_t> rows(t.inputs.size());
  std::iota(rows.begin(), rows.end(), 0);
  const double lambda = 0.37, gamma = 2.0;
  const double total =
      classifier_batch_loss(t.model, t.inputs, t.tensor, soft, rows, alpha, gamma, lambda, {}).scalar();

  // Independent scalar recomputation from predicted probabilities.
  const std::size_t a = t.tensor.num_annotators();
  double focal = 0, align = 0;
  std::size_t cells = 0;
  for (std::size_t i : rows) {
    const auto probs = t.model.predict(t.inputs[i]);
    std::array<double, 3> mean{};
    std::size_t n = 0;
    for (std::size_t j = 0; j < a; ++j) {
      if (!t.tensor.observed(i, j)) continue;
      ++cells;
      ++n;
      for (std::size_t c = 0; c < 3; ++c) {
        const int y = t.tensor.label(i, j, c);
        focal += focal_term(probs[j][c], y, y ? alpha[c] : 1.0, gamma);
        mean[c] += probs[j][c];
      }
    }
    for (std::size_t c = 0; c < 3; ++c) align += binary_entropy_cross(mean[c] / n, soft[i][c]);
  }
  focal /= static_cast<double>(cells);
  align /= static_cast<double>(rows.size());
  EXPECT_NEAR(total, focal + lambda * align, 1e-9);
}

TEST(Objective, UnobservedLabelFlipsAreInvisible) {
  Toy t;
  const auto soft = perspex::corpus::soft_targets(t.tensor);
  const ClassWeights alpha{1.0, 2.0, 1.0};
  std::vector<std::size_t> rows(t.inputs.size());
  std::iota(rows.begin(), rows.end(), 0);

  const Var l1 = classifier_batch_loss(t.model, t.inputs, t.tensor, soft, rows, alpha, 2.0, 1.0, {});
  perspex::tc::backward(l1);
  const auto g1 = grads(t.model.params());
  t.model.params().zero_grad();

  AnnotationTensor flipped = t.tensor;
  std::size_t pokes = 0;
  for (std::size_t i = 0; i < flipped.num_instances(); ++i) {
    for (std::size_t j = 0; j < flipped.num_annotators(); ++j) {
      if (flipped.observed(i, j)) continue;
      for (std::size_t c = 0; c < 3; ++c, ++pokes) flipped.poke_label(i, j, c, 1);
    }
  }
  ASSERT_GT(pokes, 0u);
  const Var l2 = classifier_batch_loss(t.model, t.inputs, flipped, soft, rows, alpha, 2.0, 1.0, {});
  perspex::tc::backward(l2);
  const auto g2 = grads(t.model.params());
  EXPECT_TRUE(bit_equal(l1.value(), l2.value()));
  ASSERT_EQ(g1.size(), g2.size());
  for (std::size_t k = 0; k < g1.size(); ++k) EXPECT_TRUE(bit_equal(g1[k], g2[k])) << k;
}

TEST(Classifier, AnnotatorsGetDistinctRepresentations) {
  Toy t;
  const auto z0 = t.model.fused_value(t.inputs[0], 0);
  const auto z1 = t.model.fused_value(t.inputs[0], 1);
  const std::size_t d = static_cast<std::size_t>(t.model.config().d_model);
  for (std::size_t c = 0; c < d; ++c) EXPECT_EQ(z0(0, c), z1(0, c));
  bool differs = false;
  for (std::size_t c = d; c < z0.cols(); ++c) differs |= z0(0, c) != z1(0, c);
  EXPECT_TRUE(differs);
  EXPECT_THROW(t.model.annotator_index("nobody"), perspex::ArgumentError);
}

TEST(Classifier, CheckpointAndPredictionRoundTrip) {
  Toy t;
  const auto dir = perspex::testing::scratch_dir("passport_ckpt");
  perspex::tc::save_checkpoint(dir / "c.ckpt", make_classifier_checkpoint(t.model, t.vocab));
  const auto back = load_classifier(dir / "c.ckpt");
  EXPECT_EQ(back.params().checksum(), t.model.params().checksum());
  EXPECT_EQ(back.predict(t.inputs[1]), t.model.predict(t.inputs[1]));

  const auto dump = predict_split(t.model, t.vocab, t.corpus, perspex::corpus::Split::kDev);
  save_predictions(dump, dir / "p.jsonl");
  const auto loaded = load_predictions(dir / "p.jsonl");
  EXPECT_EQ(loaded.instance_ids, dump.instance_ids);
  EXPECT_EQ(loaded.observed, dump.observed);
  ASSERT_EQ(loaded.probs.size(), dump.probs.size());
  for (std::size_t k = 0; k < dump.probs.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(loaded.probs[k][c], dump.probs[k][c], 1e-15);
  }
}

TEST(Classifier, TrainingIsDeterministicAndReportsManifest) {
  const auto c = perspex::synth::memorization_corpus(6, 3);
  const auto vocab = perspex::text::build_vocab(c, 1);
  auto tcfg = perspex::tc::TrainConfig::classifier_defaults();
  tcfg.epochs = 3;
  tcfg.lr_multiplier = 100;
  tcfg.batch_size = 4;
  auto mcfg = perspex::testing::toy_config();
  mcfg.dropout = 0.1;
  const auto a = train_classifier(c, vocab, mcfg, tcfg);
  const auto b = train_classifier(c, vocab, mcfg, tcfg);
  EXPECT_EQ(a.model.params().checksum(), b.model.params().checksum());
  EXPECT_EQ(a.manifest.dump(), b.manifest.dump());
  EXPECT_TRUE(a.manifest.contains("best_epoch"));
}
