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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "perspex/tc/autodiff.hpp"
#include "perspex/tc/config.hpp"

namespace perspex::tc {

struct NamedParam {
  std::string name;
  Var var;
};

/// Owns the trainable parameters of one model, in registration order.
class ParamStore {
 public:
  Var create(const std::string& name, Matrix init);
  const std::vector<NamedParam>& params() const { return params_; }
  /// Throws ArtifactError for unknown names.
  Var get(const std::string& name) const;
  void zero_grad();
  std::size_t parameter_count() const;
  /// FNV-1a 64 over names, shapes and little-endian value bytes, as hex.
  std::string checksum() const;

 private:
  std::vector<NamedParam> params_;
};

/// Normal(0, std) initialized matrix.
Matrix normal_matrix(std::size_t rows, std::size_t cols, double std, std::mt19937_64& rng);

/// Per-call settings for stochastic layers.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;

  Var apply_dropout(const Var& x) const;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
         std::mt19937_64& rng, double init_std = 0.02);
  Var operator()(const Var& x) const;

  Var weight;  // in x out
  Var bias;    // 1 x out
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::size_t dim);
  Var operator()(const Var& x) const;

  Var gain;
  Var bias;
};

/// Token embedding table; lookups are scaled by sqrt(d_model).
class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamStore& store, const std::string& name, std::size_t vocab, std::size_t dim,
            std::mt19937_64& rng);
  Var operator()(std::span<const int> ids) const;

  Var table;
  double scale = 1.0;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, std::size_t d_model,
                     std::size_t n_heads, std::mt19937_64& rng);
  /// `allow` is (query rows x key rows); zero entries receive no attention.
  Var operator()(const Var& query_in, const Var& key_value_in, const Matrix& allow) const;

  Linear q, k, v, o;
  std::size_t heads = 1;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& name, std::size_t d_model, std::size_t hidden,
              std::mt19937_64& rng);
  Var operator()(const Var& x) const;

  Linear in, out;
};

/// Pre-norm encoder block: self-attention then feed-forward, both residual.
class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(ParamStore& store, const std::string& name, const ModelConfig& cfg,
               std::mt19937_64& rng);
  Var operator()(const Var& x, const Matrix& allow, const ForwardContext& ctx) const;

  LayerNorm ln_attn, ln_ffn;
  MultiHeadAttention attn;
  FeedForward ffn;
};

/// Pre-norm decoder block: causal self-attention, cross-attention, feed-forward.
class DecoderBlock {
 public:
  DecoderBlock() = default;
  DecoderBlock(ParamStore& store, const std::string& name, const ModelConfig& cfg,
               std::mt19937_64& rng);
  Var operator()(const Var& y, const Var& memory, const Matrix& self_allow,
                 const Matrix& cross_allow, const ForwardContext& ctx) const;

  LayerNorm ln_self, ln_cross, ln_ffn;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ffn;
};

/// Fixed sin/cos table for positions [offset, offset + length).
Matrix sinusoidal_positions(std::size_t length, std::size_t dim, std::size_t offset = 0);

/// Attention mask letting every query see exactly the keys with key_mask true.
Matrix key_allow(std::size_t queries, std::span<const bool> key_mask);
/// Lower-triangular mask: query t sees keys 0..t.
Matrix causal_allow(std::size_t length);

/// Stack of encoder blocks plus a final layer norm. Input rows are already
/// embedded and position-encoded.
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, std::mt19937_64& rng);
  Var operator()(const Var& embedded, std::span<const bool> key_mask,
                 const ForwardContext& ctx) const;

  std::vector<EncoderBlock> blocks;
  LayerNorm final_norm;
};

/// Stack of decoder blocks plus a final layer norm; returns hidden states.
class Decoder {
 public:
  Decoder() = default;
  Decoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, std::mt19937_64& rng);
  Var operator()(const Var& embedded, const Var& memory, std::span<const bool> memory_mask,
                 const ForwardContext& ctx) const;

  std::vector<DecoderBlock> blocks;
  LayerNorm final_norm;
};

/// Mean of the rows of `states` where `keep` is true (1 x d). Throws when
/// no row is kept.
Var masked_mean_rows(const Var& states, std::span<const bool> keep);

}  // namespace perspex::tc
