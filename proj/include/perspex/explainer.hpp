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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perspex/corpus.hpp"
#include "perspex/passport.hpp"
#include "perspex/tc/checkpoint.hpp"
#include "perspex/tc/config.hpp"
#include "perspex/tc/nn.hpp"
#include "perspex/text.hpp"

namespace perspex::explainer {

enum class ExplainerMode { kPosthoc, kBridge };
std::string_view mode_name(ExplainerMode m);
ExplainerMode parse_mode(std::string_view name);

/// "<gender>, age <age>, <nationality>, <education>"
std::string render_persona(const corpus::AnnotatorProfile& p);
/// Canonical gold block, e.g. "E N".
std::string gold_label_block(corpus::LabelSet labels);
/// "probs C=0.123 E=0.500 N=0.900"
std::string probs_label_block(const passport::ClassProbabilities& p);

/// Generation prompt in fixed segment order. The control token is kept as
/// an annotator id and inserted as its reserved vocabulary id when encoded.
struct Prompt {
  std::string annotator_id;
  std::string persona;
  std::string context;
  std::string statement;
  std::optional<std::string> label_block;

  /// "[ANN:<id>] persona: ... | context: ... | statement: ... | labels: ..."
  std::string text() const;
};

Prompt build_prompt(const corpus::Instance& inst, const corpus::AnnotatorProfile& profile,
                    std::optional<std::string> label_block);

/// Control id, prompt tokens, EOS. The context is cut first when the result
/// would exceed max_len; throws ArgumentError if that is not enough.
std::vector<int> encode_prompt(const Prompt& prompt, const text::Vocab& vocab, std::size_t max_len);

/// Two-layer MLP from the classifier's fused vector to k prefix embeddings.
class PrefixBridge {
 public:
  PrefixBridge() = default;
  PrefixBridge(tc::ParamStore& store, const std::string& name, std::size_t in_dim, std::size_t hidden,
               std::size_t prefix_len, std::size_t d_model, std::mt19937_64& rng);
  /// z is 1 x in_dim; the result is prefix_len x d_model. Throws on a width mismatch.
  tc::Var operator()(const tc::Var& z) const;
  std::size_t in_dim() const { return in_dim_; }
  std::size_t prefix_len() const { return k_; }

  tc::Linear first, second;

 private:
  std::size_t in_dim_ = 0;
  std::size_t k_ = 0;
  std::size_t d_ = 0;
};

struct DecodingOptions {
  std::size_t beam_width = 1;  // 1 = greedy
  std::size_t max_len = 128;
  nlohmann::json to_json() const;
};

struct Decoded {
  std::vector<int> ids;  // without EOS
  bool empty = false;    // EOS came first
};

/// One training or scoring example.
struct Example {
  std::vector<int> prompt;
  std::vector<int> target;  // content ids followed by EOS
  tc::Matrix z;             // bridge mode only: 1 x fused dim
};

/// Encoder-decoder generator with a shared token embedding, sinusoidal
/// positions and an optional prefix bridge.
class Explainer {
 public:
  /// `fused_dim` is required (> 0) in bridge mode and ignored otherwise.
  Explainer(tc::ModelConfig cfg, std::size_t vocab_size, ExplainerMode mode, std::size_t fused_dim,
            bool bridge_label_block = false);
  Explainer(Explainer&&) = default;
  Explainer& operator=(Explainer&&) = default;

  const tc::ModelConfig& config() const { return cfg_; }
  ExplainerMode mode() const { return mode_; }
  bool bridge_label_block() const { return bridge_label_block_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t fused_dim() const { return fused_dim_; }
  tc::ParamStore& params() { return store_; }
  const tc::ParamStore& params() const { return store_; }

  /// Encoder states for the prompt, with the bridge prefix in front when
  /// `z` is given. Rows = prefix length + prompt length.
  tc::Var encode(std::span<const int> prompt, const tc::Matrix* z, const tc::ForwardContext& ctx) const;
  /// Output logits for each decoder input position.
  tc::Var decode_logits(const tc::Var& memory, std::span<const int> decoder_in,
                        const tc::ForwardContext& ctx) const;
  /// Summed token cross-entropy of one example under teacher forcing.
  tc::Var example_loss_sum(const Example& ex, const tc::ForwardContext& ctx) const;
  /// Mean token cross-entropy over a batch.
  tc::Var batch_loss(std::span<const Example> batch, const tc::ForwardContext& ctx) const;

  Decoded generate(std::span<const int> prompt, const tc::Matrix* z, const DecodingOptions& opts) const;

  /// Mean-pooled final encoder states of `ids` (no prefix). With
  /// `embedding_probe` the scaled token embeddings are pooled instead.
  std::vector<double> text_vector(std::span<const int> ids, bool embedding_probe = false) const;

  tc::Embedding embed;
  tc::Encoder encoder;
  tc::Decoder decoder;
  tc::Linear out;
  std::optional<PrefixBridge> bridge;

 private:
  tc::ModelConfig cfg_;
  std::size_t vocab_size_ = 0;
  ExplainerMode mode_ = ExplainerMode::kPosthoc;
  std::size_t fused_dim_ = 0;
  bool bridge_label_block_ = false;
  tc::ParamStore store_;
};

struct ExplainerOptions {
  ExplainerMode mode = ExplainerMode::kPosthoc;
  /// Bridge mode only: keep the gold label block in training prompts.
  bool bridge_label_block = false;
};

/// Prompt for one (instance, annotator) at generation time. Post-hoc prompts
/// carry the classifier's live probabilities; bridge prompts carry none
/// unless the explainer was trained with a label block.
Prompt inference_prompt(const Explainer& model, const passport::PassportClassifier& classifier,
                        const text::Vocab& vocab, const corpus::Instance& inst,
                        const corpus::AnnotatorProfile& profile);

/// Training examples for one split: one per (instance, annotator, label,
/// rationale) with the judgment's full gold label set in the prompt.
std::vector<Example> build_examples(const corpus::Corpus& corpus, corpus::Split split, const text::Vocab& vocab,
                                    const passport::PassportClassifier& classifier, const tc::ModelConfig& cfg,
                                    const ExplainerOptions& opts);

struct ExplainerTrainResult {
  Explainer model;
  nlohmann::json manifest;
  tc::Checkpoint checkpoint;
};

/// Teacher-forced training with early stopping on dev loss. The classifier
/// is only read; its checksum is verified after every epoch and a change
/// raises InvariantError.
ExplainerTrainResult train_explainer(const corpus::Corpus& corpus, const text::Vocab& vocab,
                                     const passport::PassportClassifier& classifier,
                                     const tc::ModelConfig& model_cfg, const tc::TrainConfig& train_cfg,
                                     const ExplainerOptions& opts, std::ostream* log = nullptr);

tc::Checkpoint make_explainer_checkpoint(const Explainer& model, const text::Vocab& vocab,
                                         nlohmann::json extra = nlohmann::json::object(),
                                         const tc::AdamW* optimizer = nullptr);
Explainer explainer_from_checkpoint(const tc::Checkpoint& ckpt);
Explainer load_explainer(const std::filesystem::path& path);

struct GeneratedExplanation {
  std::string instance_id;
  std::string annotator_id;
  ExplainerMode mode = ExplainerMode::kPosthoc;
  std::string text;
  std::size_t token_count = 0;
  bool empty = false;
  std::string prompt;
  nlohmann::json decoding;
};

/// Explanation for one (instance, annotator).
GeneratedExplanation generate_one(const Explainer& model, const passport::PassportClassifier& classifier,
                                  const text::Vocab& vocab, const corpus::Corpus& corpus,
                                  const corpus::Instance& inst, std::string_view annotator_id,
                                  const DecodingOptions& opts);

/// One explanation per observed judgment of `split`, in corpus order.
std::vector<GeneratedExplanation> generate_split(const Explainer& model,
                                                 const passport::PassportClassifier& classifier,
                                                 const text::Vocab& vocab, const corpus::Corpus& corpus,
                                                 corpus::Split split, const DecodingOptions& opts);

void save_generations(const std::vector<GeneratedExplanation>& items, const std::filesystem::path& path);
std::vector<GeneratedExplanation> load_generations(const std::filesystem::path& path);

}  // namespace perspex::explainer
