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

#include <cstdint>
#include <string>

#include <json.hpp>

namespace perspex::tc {

/// Architecture sizes shared by the classifier and the generator.
struct ModelConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int ffn_dim = 128;
  double dropout = 0.1;
  int max_len_classifier = 256;
  int max_len_explainer_in = 512;
  int max_len_explainer_out = 128;
  int annotator_embed_dim = 64;
  int metadata_dim = 32;
  /// Hidden width of the classification head; 0 gives a single linear layer.
  int head_hidden = 64;
  int prefix_len = 8;
  int bridge_hidden = 256;
  std::uint64_t seed = 13;

  /// Throws ArgumentError when an invariant (divisibility, positivity) fails.
  void validate() const;
};

/// Optimization settings for one training run.
struct TrainConfig {
  int epochs = 50;
  double lr = 2e-5;
  /// Scales `lr`; from-scratch desk-scale models need far larger steps than
  /// pretrained backbones.
  double lr_multiplier = 1.0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double warmup_ratio = 0.06;
  double clip_max_norm = 1.0;
  int patience = 3;
  int batch_size = 32;
  double lambda_soft = 1.0;
  double focal_gamma = 2.0;

  double effective_lr() const { return lr * lr_multiplier; }
  void validate() const;

  static TrainConfig classifier_defaults();
  static TrainConfig explainer_defaults();
};

void to_json(nlohmann::json& j, const ModelConfig& c);
/// Strict: unknown keys are rejected, missing keys keep their defaults.
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Rejects any key of `j` not in `allowed`; `where` names the section.
void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                      const std::string& where);

}  // namespace perspex::tc
