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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perspex/calibrate.hpp"
#include "perspex/corpus.hpp"
#include "perspex/tc/checkpoint.hpp"
#include "perspex/tc/config.hpp"
#include "perspex/tc/nn.hpp"
#include "perspex/text.hpp"

namespace perspex::passport {

using calibrate::ClassProbabilities;
using ClassWeights = std::array<double, corpus::kNumLabels>;

/// One-hot gender, nationality and education over the corpus schema, then
/// age min-max scaled over the corpus annotators (0.5 when all ages agree).
class MetadataFeaturizer {
 public:
  MetadataFeaturizer() = default;
  MetadataFeaturizer(corpus::MetadataSchema schema, int min_age, int max_age);
  static MetadataFeaturizer from_corpus(const corpus::Corpus& corpus);

  std::size_t dim() const;
  /// Throws ArgumentError for a category outside the schema.
  std::vector<double> features(const corpus::AnnotatorProfile& p) const;

  nlohmann::json to_json() const;
  static MetadataFeaturizer from_json(const nlohmann::json& j);

 private:
  corpus::MetadataSchema schema_;
  int min_age_ = 0;
  int max_age_ = 0;
};

/// z = [h; u; m].
tc::Var fuse_parts(const tc::Var& h, const tc::Var& u, const tc::Var& m);

/// Token ids of "<context> | <statement>" with BOS/EOS.
std::vector<int> classifier_input(const corpus::Instance& inst, const text::Vocab& vocab,
                                  std::size_t max_len);

/// Encoder + annotator table + metadata projection + classification head.
class PassportClassifier {
 public:
  PassportClassifier(tc::ModelConfig cfg, std::size_t vocab_size,
                     std::vector<corpus::AnnotatorProfile> annotators, MetadataFeaturizer featurizer);
  PassportClassifier(PassportClassifier&&) = default;
  PassportClassifier& operator=(PassportClassifier&&) = default;

  const tc::ModelConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_size_; }
  tc::ParamStore& params() { return store_; }
  const tc::ParamStore& params() const { return store_; }
  const std::vector<corpus::AnnotatorProfile>& annotators() const { return annotators_; }
  const MetadataFeaturizer& featurizer() const { return featurizer_; }
  /// Throws ArgumentError for an unknown id.
  std::size_t annotator_index(std::string_view id) const;
  std::size_t fused_dim() const;

  /// Masked mean of the final encoder states (1 x H).
  tc::Var pooled(std::span<const int> ids, const tc::ForwardContext& ctx) const;
  /// Fused representation for one annotator (1 x F) or all of them (A x F).
  tc::Var fuse(const tc::Var& h, std::size_t annotator) const;
  tc::Var fuse_all(const tc::Var& h) const;
  /// Head logits for each row of z.
  tc::Var logits(const tc::Var& z) const;
  /// Elementwise sigmoid of the head logits for a single z row.
  ClassProbabilities classify(const tc::Var& z) const;

  /// Inference-mode probabilities for every annotator, in table order.
  std::vector<ClassProbabilities> predict(std::span<const int> ids) const;
  /// Inference-mode z for one annotator (1 x F).
  tc::Matrix fused_value(std::span<const int> ids, std::size_t annotator) const;

  tc::Embedding embed;
  tc::Encoder encoder;
  tc::Var annotator_table;  // A x E
  tc::Linear meta_proj;
  tc::Linear head_hidden;  // unused when head_hidden == 0
  tc::Linear head_out;

 private:
  tc::ModelConfig cfg_;
  std::size_t vocab_size_ = 0;
  std::vector<corpus::AnnotatorProfile> annotators_;
  MetadataFeaturizer featurizer_;
  tc::Matrix meta_features_;  // A x featurizer dim
  tc::ParamStore store_;
};

/// Masked focal BCE computed from logits (p = sigmoid(logit)). Rows of
/// `logits` and `labels` are (instance, annotator) cells; cells with
/// mask 0 are never read. Sum over observed cells divided by their count.
tc::Var masked_focal_bce(const tc::Var& logits, const tc::Matrix& labels, std::span<const std::uint8_t> mask,
                         const ClassWeights& alpha, double gamma);
/// Single-cell focal term on a probability.
double focal_term(double p, int y, double alpha, double gamma);

/// Soft-label alignment: BCE of the mean observed-annotator probability
/// against the soft target, summed over classes, averaged over instances.
/// `probs` rows are cells grouped by instance, `annotators` per instance.
tc::Var soft_alignment_loss(const tc::Var& probs, std::span<const std::uint8_t> mask, std::size_t annotators,
                            std::span<const corpus::SoftTarget> soft);

/// alpha_c = negatives / positives over observed cells, clamped to [0.1, 10].
/// Focal term plus lambda times soft alignment for the instances `rows`.
/// Unobserved cells never reach the loss, whatever the tensor stores there.
tc::Var classifier_batch_loss(const PassportClassifier& model, std::span<const std::vector<int>> inputs,
                              const corpus::AnnotationTensor& tensor, std::span<const corpus::SoftTarget> soft,
                              std::span<const std::size_t> rows, const ClassWeights& alpha, double gamma,
                              double lambda_soft, const tc::ForwardContext& ctx);

ClassWeights compute_class_weights(const corpus::AnnotationTensor& train);

/// Patience-based stopping on a metric that should increase.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience);
  /// Records the next epoch's metric; true when training should stop.
  bool update(double metric);
  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }
  int epochs_seen() const { return epoch_; }
  bool last_improved() const { return stale_ == 0; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_ = 0.0;
};

struct ClassifierTrainResult {
  PassportClassifier model;
  nlohmann::json manifest;
  tc::Checkpoint checkpoint;
};

/// AdamW with warmup/decay and clipping; dev macro-F1 at threshold 0.5
/// after every epoch, best epoch restored at the end. Throws
/// DivergenceError naming the step on a non-finite loss.
ClassifierTrainResult train_classifier(const corpus::Corpus& corpus, const text::Vocab& vocab,
                                       const tc::ModelConfig& model_cfg, const tc::TrainConfig& train_cfg,
                                       std::ostream* log = nullptr);

tc::Checkpoint make_classifier_checkpoint(const PassportClassifier& model, const text::Vocab& vocab,
                                          nlohmann::json extra = nlohmann::json::object(),
                                          const tc::AdamW* optimizer = nullptr);
/// Rebuilds the model from checkpoint metadata and restores its parameters.
PassportClassifier classifier_from_checkpoint(const tc::Checkpoint& ckpt);
PassportClassifier load_classifier(const std::filesystem::path& path);

/// Probabilities for every (instance, annotator) cell of one split, laid out
/// like build_annotation_tensor(corpus, split).
struct PredictionDump {
  std::vector<std::string> instance_ids;
  std::vector<std::string> annotator_ids;
  std::vector<ClassProbabilities> probs;
  std::vector<std::uint8_t> observed;
};
PredictionDump predict_split(const PassportClassifier& model, const text::Vocab& vocab,
                             const corpus::Corpus& corpus, corpus::Split split);
/// One JSON line per cell.
void save_predictions(const PredictionDump& dump, const std::filesystem::path& path);
PredictionDump load_predictions(const std::filesystem::path& path);

}  // namespace perspex::passport
