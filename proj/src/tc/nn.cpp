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

#include "perspex/tc/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "perspex/error.hpp"

namespace perspex::tc {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  fnv_bytes(h, b, 8);
}

}  // namespace

Var ParamStore::create(const std::string& name, Matrix init) {
  for (const auto& p : params_) {
    if (p.name == name) throw ArgumentError("duplicate parameter name: " + name);
  }
  Var v = Var::parameter(std::move(init));
  params_.push_back({name, v});
  return v;
}

Var ParamStore::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.var;
  }
  throw ArtifactError("unknown parameter: " + name);
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.var.clear_grad();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().size();
  return n;
}

std::string ParamStore::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& p : params_) {
    fnv_bytes(h, p.name.data(), p.name.size());
    fnv_u64(h, p.var.rows());
    fnv_u64(h, p.var.cols());
    for (double v : p.var.value().values()) fnv_u64(h, std::bit_cast<std::uint64_t>(v));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Matrix normal_matrix(std::size_t rows, std::size_t cols, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

Var ForwardContext::apply_dropout(const Var& x) const {
  if (!training || dropout <= 0.0 || rng == nullptr) return x;
  return tc::dropout(x, dropout, *rng);
}

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
               std::mt19937_64& rng, double init_std)
    : weight(store.create(name + ".weight", normal_matrix(in, out, init_std, rng))),
      bias(store.create(name + ".bias", Matrix(1, out))) {}

Var Linear::operator()(const Var& x) const { return add_row(matmul(x, weight), bias); }

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::size_t dim)
    : gain(store.create(name + ".gain", Matrix(1, dim, 1.0))),
      bias(store.create(name + ".bias", Matrix(1, dim))) {}

Var LayerNorm::operator()(const Var& x) const { return layer_norm(x, gain, bias); }

Embedding::Embedding(ParamStore& store, const std::string& name, std::size_t vocab,
                     std::size_t dim, std::mt19937_64& rng)
    : table(store.create(name + ".table", normal_matrix(vocab, dim, 0.02, rng))),
      scale(std::sqrt(static_cast<double>(dim))) {}

Var Embedding::operator()(std::span<const int> ids) const {
  return tc::scale(gather_rows(table, ids), scale);
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name,
                                       std::size_t d_model, std::size_t n_heads,
                                       std::mt19937_64& rng)
    : q(store, name + ".q", d_model, d_model, rng),
      k(store, name + ".k", d_model, d_model, rng),
      v(store, name + ".v", d_model, d_model, rng),
      o(store, name + ".o", d_model, d_model, rng),
      heads(n_heads) {}

Var MultiHeadAttention::operator()(const Var& query_in, const Var& key_value_in,
                                   const Matrix& allow) const {
  const Var qs = q(query_in);
  const Var ks = k(key_value_in);
  const Var vs = v(key_value_in);
  const std::size_t dh = qs.cols() / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Var qh = slice_cols(qs, h * dh, dh);
    const Var kh = slice_cols(ks, h * dh, dh);
    const Var vh = slice_cols(vs, h * dh, dh);
    const Var weights = masked_softmax_rows(scale(matmul_nt(qh, kh), inv_sqrt), allow);
    outs.push_back(matmul(weights, vh));
  }
  return o(heads == 1 ? outs[0] : concat_cols(outs));
}

FeedForward::FeedForward(ParamStore& store, const std::string& name, std::size_t d_model,
                         std::size_t hidden, std::mt19937_64& rng)
    : in(store, name + ".in", d_model, hidden, rng), out(store, name + ".out", hidden, d_model, rng) {}

Var FeedForward::operator()(const Var& x) const { return out(gelu(in(x))); }

EncoderBlock::EncoderBlock(ParamStore& store, const std::string& name, const ModelConfig& cfg,
                           std::mt19937_64& rng)
    : ln_attn(store, name + ".ln_attn", static_cast<std::size_t>(cfg.d_model)),
      ln_ffn(store, name + ".ln_ffn", static_cast<std::size_t>(cfg.d_model)),
      attn(store, name + ".attn", static_cast<std::size_t>(cfg.d_model),
           static_cast<std::size_t>(cfg.n_heads), rng),
      ffn(store, name + ".ffn", static_cast<std::size_t>(cfg.d_model),
          static_cast<std::size_t>(cfg.ffn_dim), rng) {}

Var EncoderBlock::operator()(const Var& x, const Matrix& allow, const ForwardContext& ctx) const {
  const Var normed = ln_attn(x);
  const Var a = add(x, ctx.apply_dropout(attn(normed, normed, allow)));
  return add(a, ctx.apply_dropout(ffn(ln_ffn(a))));
}

DecoderBlock::DecoderBlock(ParamStore& store, const std::string& name, const ModelConfig& cfg,
                           std::mt19937_64& rng)
    : ln_self(store, name + ".ln_self", static_cast<std::size_t>(cfg.d_model)),
      ln_cross(store, name + ".ln_cross", static_cast<std::size_t>(cfg.d_model)),
      ln_ffn(store, name + ".ln_ffn", static_cast<std::size_t>(cfg.d_model)),
      self_attn(store, name + ".self_attn", static_cast<std::size_t>(cfg.d_model),
                static_cast<std::size_t>(cfg.n_heads), rng),
      cross_attn(store, name + ".cross_attn", static_cast<std::size_t>(cfg.d_model),
                 static_cast<std::size_t>(cfg.n_heads), rng),
      ffn(store, name + ".ffn", static_cast<std::size_t>(cfg.d_model),
          static_cast<std::size_t>(cfg.ffn_dim), rng) {}

Var DecoderBlock::operator()(const Var& y, const Var& memory, const Matrix& self_allow,
                             const Matrix& cross_allow, const ForwardContext& ctx) const {
  const Var normed = ln_self(y);
  const Var a = add(y, ctx.apply_dropout(self_attn(normed, normed, self_allow)));
  const Var b = add(a, ctx.apply_dropout(cross_attn(ln_cross(a), memory, cross_allow)));
  return add(b, ctx.apply_dropout(ffn(ln_ffn(b))));
}

Matrix sinusoidal_positions(std::size_t length, std::size_t dim, std::size_t offset) {
  Matrix pe(length, dim);
  for (std::size_t t = 0; t < length; ++t) {
    const double pos = static_cast<double>(t + offset);
    for (std::size_t i = 0; i < dim; ++i) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      pe(t, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return pe;
}

Matrix key_allow(std::size_t queries, std::span<const bool> key_mask) {
  Matrix allow(queries, key_mask.size());
  for (std::size_t r = 0; r < queries; ++r) {
    for (std::size_t c = 0; c < key_mask.size(); ++c) allow(r, c) = key_mask[c] ? 1.0 : 0.0;
  }
  return allow;
}

Matrix causal_allow(std::size_t length) {
  Matrix allow(length, length);
  for (std::size_t r = 0; r < length; ++r) {
    for (std::size_t c = 0; c <= r; ++c) allow(r, c) = 1.0;
  }
  return allow;
}

Encoder::Encoder(ParamStore& store, const std::string& name, const ModelConfig& cfg,
                 std::mt19937_64& rng)
    : final_norm(store, name + ".final_norm", static_cast<std::size_t>(cfg.d_model)) {
  for (int i = 0; i < cfg.n_layers; ++i) {
    blocks.emplace_back(store, name + ".block" + std::to_string(i), cfg, rng);
  }
}

Var Encoder::operator()(const Var& embedded, std::span<const bool> key_mask,
                        const ForwardContext& ctx) const {
  if (key_mask.size() != embedded.rows()) throw ArgumentError("encoder: key mask length mismatch");
  const Matrix allow = key_allow(embedded.rows(), key_mask);
  Var x = ctx.apply_dropout(embedded);
  for (const auto& b : blocks) x = b(x, allow, ctx);
  return final_norm(x);
}

Decoder::Decoder(ParamStore& store, const std::string& name, const ModelConfig& cfg,
                 std::mt19937_64& rng)
    : final_norm(store, name + ".final_norm", static_cast<std::size_t>(cfg.d_model)) {
  for (int i = 0; i < cfg.n_layers; ++i) {
    blocks.emplace_back(store, name + ".block" + std::to_string(i), cfg, rng);
  }
}

Var Decoder::operator()(const Var& embedded, const Var& memory, std::span<const bool> memory_mask,
                        const ForwardContext& ctx) const {
  if (memory_mask.size() != memory.rows()) throw ArgumentError("decoder: memory mask length mismatch");
  const Matrix self_allow = causal_allow(embedded.rows());
  const Matrix cross_allow = key_allow(embedded.rows(), memory_mask);
  Var y = ctx.apply_dropout(embedded);
  for (const auto& b : blocks) y = b(y, memory, self_allow, cross_allow, ctx);
  return final_norm(y);
}

Var masked_mean_rows(const Var& states, std::span<const bool> keep) {
  if (keep.size() != states.rows()) throw ArgumentError("masked_mean_rows: mask length mismatch");
  std::size_t n = 0;
  for (bool k : keep) n += k ? 1 : 0;
  if (n == 0) throw ArgumentError("masked_mean_rows: every row is padding");
  Matrix w(1, keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) w(0, i) = keep[i] ? 1.0 / static_cast<double>(n) : 0.0;
  return matmul(Var::constant(std::move(w)), states);
}

}  // namespace perspex::tc
