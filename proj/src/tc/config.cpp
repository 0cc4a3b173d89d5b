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

#include "perspex/tc/config.hpp"

#include <algorithm>

#include "perspex/error.hpp"

namespace perspex::tc {

void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                      const std::string& where) {
  if (!j.is_object()) throw ArgumentError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) throw ArgumentError(where + ": unknown key '" + it.key() + "'");
  }
}

namespace {

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model < 1 || n_layers < 1 || n_heads < 1 || ffn_dim < 1 || annotator_embed_dim < 1 ||
      metadata_dim < 1 || prefix_len < 0 || bridge_hidden < 1 || head_hidden < 0 ||
      max_len_classifier < 2 || max_len_explainer_in < 2 || max_len_explainer_out < 2) {
    throw ArgumentError("model config: all dimensions must be >= 1");
  }
  if (d_model % n_heads != 0) throw ArgumentError("model config: d_model must be divisible by n_heads");
  if (dropout < 0.0 || dropout >= 1.0) throw ArgumentError("model config: dropout must be in [0, 1)");
}

void TrainConfig::validate() const {
  if (!(effective_lr() > 0.0)) throw ArgumentError("train config: lr must be > 0");
  if (patience < 1) throw ArgumentError("train config: patience must be >= 1");
  if (lambda_soft < 0.0) throw ArgumentError("train config: lambda_soft must be >= 0");
  if (epochs < 1 || batch_size < 1) throw ArgumentError("train config: epochs and batch_size must be >= 1");
  if (focal_gamma < 0.0) throw ArgumentError("train config: focal_gamma must be >= 0");
  if (warmup_ratio < 0.0 || warmup_ratio > 1.0) throw ArgumentError("train config: warmup_ratio must be in [0, 1]");
}

TrainConfig TrainConfig::classifier_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::explainer_defaults() {
  TrainConfig c;
  c.lr = 8e-5;
  return c;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_model", c.d_model},
                     {"n_layers", c.n_layers},
                     {"n_heads", c.n_heads},
                     {"ffn_dim", c.ffn_dim},
                     {"dropout", c.dropout},
                     {"max_len_classifier", c.max_len_classifier},
                     {"max_len_explainer_in", c.max_len_explainer_in},
                     {"max_len_explainer_out", c.max_len_explainer_out},
                     {"annotator_embed_dim", c.annotator_embed_dim},
                     {"metadata_dim", c.metadata_dim},
                     {"head_hidden", c.head_hidden},
                     {"prefix_len", c.prefix_len},
                     {"bridge_hidden", c.bridge_hidden},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  check_known_keys(j,
                   {"d_model", "n_layers", "n_heads", "ffn_dim", "dropout", "max_len_classifier",
                    "max_len_explainer_in", "max_len_explainer_out", "annotator_embed_dim",
                    "metadata_dim", "head_hidden", "prefix_len", "bridge_hidden", "seed"},
                   "model");
  maybe_get(j, "d_model", c.d_model);
  maybe_get(j, "n_layers", c.n_layers);
  maybe_get(j, "n_heads", c.n_heads);
  maybe_get(j, "ffn_dim", c.ffn_dim);
  maybe_get(j, "dropout", c.dropout);
  maybe_get(j, "max_len_classifier", c.max_len_classifier);
  maybe_get(j, "max_len_explainer_in", c.max_len_explainer_in);
  maybe_get(j, "max_len_explainer_out", c.max_len_explainer_out);
  maybe_get(j, "annotator_embed_dim", c.annotator_embed_dim);
  maybe_get(j, "metadata_dim", c.metadata_dim);
  maybe_get(j, "head_hidden", c.head_hidden);
  maybe_get(j, "prefix_len", c.prefix_len);
  maybe_get(j, "bridge_hidden", c.bridge_hidden);
  maybe_get(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"lr", c.lr},
                     {"lr_multiplier", c.lr_multiplier},
                     {"weight_decay", c.weight_decay},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"adam_eps", c.adam_eps},
                     {"warmup_ratio", c.warmup_ratio},
                     {"clip_max_norm", c.clip_max_norm},
                     {"patience", c.patience},
                     {"batch_size", c.batch_size},
                     {"lambda_soft", c.lambda_soft},
                     {"focal_gamma", c.focal_gamma}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  check_known_keys(j,
                   {"epochs", "lr", "lr_multiplier", "weight_decay", "beta1", "beta2", "adam_eps",
                    "warmup_ratio", "clip_max_norm", "patience", "batch_size", "lambda_soft",
                    "focal_gamma"},
                   "train");
  maybe_get(j, "epochs", c.epochs);
  maybe_get(j, "lr", c.lr);
  maybe_get(j, "lr_multiplier", c.lr_multiplier);
  maybe_get(j, "weight_decay", c.weight_decay);
  maybe_get(j, "beta1", c.beta1);
  maybe_get(j, "beta2", c.beta2);
  maybe_get(j, "adam_eps", c.adam_eps);
  maybe_get(j, "warmup_ratio", c.warmup_ratio);
  maybe_get(j, "clip_max_norm", c.clip_max_norm);
  maybe_get(j, "patience", c.patience);
  maybe_get(j, "batch_size", c.batch_size);
  maybe_get(j, "lambda_soft", c.lambda_soft);
  maybe_get(j, "focal_gamma", c.focal_gamma);
}

}  // namespace perspex::tc
