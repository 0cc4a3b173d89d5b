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

#include "perspex/gradcheck_suite.hpp"

#include <functional>
#include <random>

#include "perspex/explainer.hpp"
#include "perspex/passport.hpp"
#include "perspex/tc/gradcheck.hpp"
#include "perspex/tc/nn.hpp"

namespace perspex {

using tc::Matrix;
using tc::Var;

namespace {

constexpr std::size_t kD = 8;
constexpr std::size_t kHeads = 2;
constexpr std::size_t kFfn = 16;
constexpr std::size_t kVocab = 12;

tc::ModelConfig toy_config(std::uint64_t seed) {
  tc::ModelConfig c;
  c.d_model = kD;
  c.n_layers = 1;
  c.n_heads = kHeads;
  c.ffn_dim = kFfn;
  c.dropout = 0.0;
  c.max_len_classifier = 16;
  c.max_len_explainer_in = 16;
  c.max_len_explainer_out = 8;
  c.annotator_embed_dim = 4;
  c.metadata_dim = 3;
  c.head_hidden = 6;
  c.prefix_len = 2;
  c.bridge_hidden = 5;
  c.seed = seed;
  return c;
}

Matrix uniform(std::size_t r, std::size_t c, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (auto& v : m.values()) v = d(rng);
  return m;
}

Var random_param(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  return Var::parameter(uniform(r, c, -1.0, 1.0, rng));
}

/// Scalar probe sum(out .* R) with a fixed random R, so every output entry
/// contributes a distinct weight.
Var project(const Var& out, const Matrix& r) { return tc::sum(tc::mul(out, Var::constant(r))); }

std::vector<Var> all_params(const tc::ParamStore& store) {
  std::vector<Var> v;
  for (const auto& p : store.params()) v.push_back(p.var);
  return v;
}

BlockCheck check(const std::string& name, const std::function<Var()>& f, std::vector<Var> inputs, double eps) {
  const auto rep = tc::gradcheck(f, inputs, eps);
  return {name, rep.max_rel_error, rep.entries_checked, rep.worst};
}

}  // namespace

std::vector<BlockCheck> run_gradcheck_suite(std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::vector<BlockCheck> out;
  const tc::ForwardContext ctx;  // inference: dropout off

  {
    tc::ParamStore store;
    tc::Embedding emb(store, "emb", kVocab, kD, rng);
    std::vector<int> ids{1, 5, 5, 11, 0, 7};
    const Matrix r = uniform(ids.size(), kD, -1, 1, rng);
    out.push_back(check("embedding", [&] { return project(emb(ids), r); }, all_params(store), eps));
  }
  {
    tc::ParamStore store;
    tc::MultiHeadAttention attn(store, "attn", kD, kHeads, rng);
    for (const auto& p : store.params()) p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -0.5, 0.5, rng);
    Var q = random_param(4, kD, rng);
    Var kv = random_param(5, kD, rng);
    const bool keep[] = {true, true, false, true, true};
    const Matrix allow = tc::key_allow(4, keep);
    const Matrix r = uniform(4, kD, -1, 1, rng);
    auto inputs = all_params(store);
    inputs.push_back(q);
    inputs.push_back(kv);
    out.push_back(check("attention", [&] { return project(attn(q, kv, allow), r); }, inputs, eps));
  }
  {
    tc::ParamStore store;
    tc::LayerNorm ln(store, "ln", kD);
    for (const auto& p : store.params()) p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -1, 1, rng);
    Var x = random_param(3, kD, rng);
    const Matrix r = uniform(3, kD, -1, 1, rng);
    auto inputs = all_params(store);
    inputs.push_back(x);
    out.push_back(check("layer_norm", [&] { return project(ln(x), r); }, inputs, eps));
  }
  {
    tc::ParamStore store;
    tc::FeedForward ffn(store, "ffn", kD, kFfn, rng);
    for (const auto& p : store.params()) p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -0.5, 0.5, rng);
    Var x = random_param(3, kD, rng);
    const Matrix r = uniform(3, kD, -1, 1, rng);
    auto inputs = all_params(store);
    inputs.push_back(x);
    out.push_back(check("feed_forward", [&] { return project(ffn(x), r); }, inputs, eps));
  }

  const auto cfg = toy_config(seed);
  std::vector<corpus::AnnotatorProfile> profiles{{"a1", "Female", 22, "Chinese", "MSc"},
                                                 {"a2", "Male", 33, "German", "Postdoc"},
                                                 {"a3", "Female", 25, "Chinese", "MSc"}};
  passport::MetadataFeaturizer feat({{"Female", "Male"}, {"Chinese", "German"}, {"MSc", "Postdoc"}}, 22, 33);
  {
    passport::PassportClassifier cls(cfg, kVocab, profiles, feat);
    // Non-degenerate scales so the head sees more than near-zero inputs.
    for (const auto& p : cls.params().params()) {
      if (p.name.rfind("cls.embed", 0) == 0 || p.name.rfind("cls.encoder", 0) == 0) continue;
      p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -0.7, 0.7, rng);
    }
    Var h = random_param(1, kD, rng);
    const Matrix r = uniform(profiles.size(), corpus::kNumLabels, -1, 1, rng);
    std::vector<Var> inputs{h};
    for (const auto& p : cls.params().params()) {
      if (p.name.rfind("cls.embed", 0) == 0 || p.name.rfind("cls.encoder", 0) == 0) continue;
      inputs.push_back(p.var);
    }
    out.push_back(check("fusion_head", [&] { return project(cls.logits(cls.fuse_all(h)), r); }, inputs, eps));
  }
  {
    constexpr std::size_t cells = 6;
    Var logits = random_param(cells, corpus::kNumLabels, rng);
    logits.mutable_value() = uniform(cells, corpus::kNumLabels, -3, 3, rng);
    Matrix labels(cells, corpus::kNumLabels);
    std::bernoulli_distribution coin(0.5);
    for (auto& v : labels.values()) v = coin(rng) ? 1.0 : 0.0;
    const std::vector<std::uint8_t> mask{1, 0, 1, 1, 0, 1};
    const passport::ClassWeights alpha{0.7, 2.5, 1.3};
    out.push_back(check("focal_loss",
                        [&] { return passport::masked_focal_bce(logits, labels, mask, alpha, 2.0); }, {logits},
                        eps));
  }
  {
    constexpr std::size_t ann = 3, inst = 2;
    Var logits = random_param(ann * inst, corpus::kNumLabels, rng);
    const std::vector<std::uint8_t> mask{1, 1, 0, 0, 1, 1};
    const std::vector<corpus::SoftTarget> soft{{0.5, 1.0, 0.0}, {0.0, 0.5, 0.5}};
    out.push_back(check("soft_alignment",
                        [&] { return passport::soft_alignment_loss(tc::sigmoid(logits), mask, ann, soft); },
                        {logits}, eps));
  }
  {
    tc::ParamStore store;
    explainer::PrefixBridge bridge(store, "bridge", 7, 5, 2, kD, rng);
    for (const auto& p : store.params()) p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -0.7, 0.7, rng);
    Var z = random_param(1, 7, rng);
    const Matrix r = uniform(2, kD, -1, 1, rng);
    auto inputs = all_params(store);
    inputs.push_back(z);
    out.push_back(check("bridge_mlp", [&] { return project(bridge(z), r); }, inputs, eps));
  }
  {
    explainer::Explainer gen(cfg, kVocab, explainer::ExplainerMode::kBridge, 7);
    for (const auto& p : gen.params().params()) {
      p.var.mutable_value() = uniform(p.var.rows(), p.var.cols(), -0.3, 0.3, rng);
    }
    explainer::Example ex;
    ex.prompt = {4, 6, 7, 9, text::kEos};
    ex.target = {5, 8, 5, 10, text::kEos};
    ex.z = uniform(1, 7, -1, 1, rng);
    out.push_back(check("decoder_cross_entropy", [&] { return gen.example_loss_sum(ex, ctx); },
                        all_params(gen.params()), eps));
  }
  return out;
}

nlohmann::json to_json(const std::vector<BlockCheck>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"block", c.block}, {"max_rel_error", c.max_rel_error}, {"entries", c.entries}, {"worst", c.worst}});
  }
  return arr;
}

}  // namespace perspex
