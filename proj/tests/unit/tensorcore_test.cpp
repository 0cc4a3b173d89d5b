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

#include <array>
#include <fstream>
#include <cmath>
#include <random>

#include "perspex/error.hpp"
#include "perspex/tc/autodiff.hpp"
#include "perspex/tc/checkpoint.hpp"
#include "perspex/tc/config.hpp"
#include "perspex/tc/gradcheck.hpp"
#include "perspex/tc/nn.hpp"
#include "perspex/tc/optim.hpp"
#include "fixtures.hpp"

namespace tc = perspex::tc;
using tc::Matrix;
using tc::Var;

namespace {

Matrix rand_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double zero_rate = 0.0) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::bernoulli_distribution zero(zero_rate);
  Matrix m(r, c);
  for (auto& v : m.values()) v = zero(rng) ? 0.0 : d(rng);
  return m;
}

Matrix naive(const Matrix& a, const Matrix& b, bool ta, bool tb) {
  const std::size_t m = ta ? a.cols() : a.rows();
  const std::size_t k = ta ? a.rows() : a.cols();
  const std::size_t n = tb ? b.rows() : b.cols();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += (ta ? a(p, i) : a(i, p)) * (tb ? b(j, p) : b(p, j));
      c(i, j) = s;
    }
  return c;
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

void expect_gradcheck(const std::function<Var()>& f, std::vector<Var> inputs) {
  const auto rep = tc::gradcheck(f, inputs);
  EXPECT_LT(rep.max_rel_error, 1e-6) << "worst " << rep.worst;
  EXPECT_GT(rep.entries_checked, 0u);
}

tc::ModelConfig toy() {
  tc::ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.ffn_dim = 16;
  c.n_layers = 2;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST(Gemm, KernelsMatchNaiveProductOnOddShapes) {
  std::mt19937_64 rng(1);
  for (auto [m, k, n] : std::vector<std::array<std::size_t, 3>>{{1, 1, 1}, {5, 3, 7}, {9, 13, 2}, {4, 8, 4}}) {
    const Matrix a = rand_matrix(m, k, rng, 0.3);
    const Matrix b = rand_matrix(k, n, rng);
    Matrix c(m, n);
    tc::gemm_acc(a, b, c);
    expect_near(c, naive(a, b, false, false), 1e-12);

    const Matrix bt = rand_matrix(n, k, rng);
    Matrix c2(m, n);
    tc::gemm_nt_acc(a, bt, c2);
    expect_near(c2, naive(a, bt, false, true), 1e-12);

    const Matrix at = rand_matrix(k, m, rng, 0.3);
    Matrix c3(m, n);
    tc::gemm_tn_acc(at, b, c3);
    expect_near(c3, naive(at, b, true, false), 1e-12);
  }
}

TEST(Gemm, Accumulates) {
  Matrix a(1, 1, 2.0), b(1, 1, 3.0), c(1, 1, 1.0);
  tc::gemm_acc(a, b, c);
  EXPECT_DOUBLE_EQ(c[0], 7.0);
}

TEST(Autodiff, ElementwiseAndShapeOpsPassGradcheck) {
  std::mt19937_64 rng(2);
  Var a = Var::parameter(rand_matrix(3, 4, rng));
  Var b = Var::parameter(rand_matrix(3, 4, rng));
  Var row = Var::parameter(rand_matrix(1, 4, rng));
  std::mt19937_64 r2(3);
  const Matrix w = rand_matrix(3, 4, r2);
  auto fixed = [&](const Var& v) { return tc::sum(tc::mul(v, Var::constant(w))); };
  expect_gradcheck([&] { return fixed(tc::add(a, b)); }, {a, b});
  expect_gradcheck([&] { return fixed(tc::sub(a, b)); }, {a, b});
  expect_gradcheck([&] { return fixed(tc::mul(a, b)); }, {a, b});
  expect_gradcheck([&] { return fixed(tc::scale(a, -1.7)); }, {a});
  expect_gradcheck([&] { return fixed(tc::add_row(a, row)); }, {a, row});
  expect_gradcheck([&] { return fixed(tc::gelu(a)); }, {a});
  expect_gradcheck([&] { return fixed(tc::tanh(a)); }, {a});
  expect_gradcheck([&] { return fixed(tc::sigmoid(a)); }, {a});
  expect_gradcheck([&] { return fixed(tc::add_constant(a, w)); }, {a});
  const Matrix w12 = rand_matrix(1, 12, r2);
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::reshape(a, 1, 12), Var::constant(w12))); }, {a});
  const Matrix w2 = rand_matrix(3, 2, r2);
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::slice_cols(a, 1, 2), Var::constant(w2))); }, {a});
  const Matrix w8 = rand_matrix(3, 8, r2);
  expect_gradcheck(
      [&] {
        const Var parts[] = {a, b};
        return tc::sum(tc::mul(tc::concat_cols(parts), Var::constant(w8)));
      },
      {a, b});
  const Matrix w64 = rand_matrix(6, 4, r2);
  expect_gradcheck(
      [&] {
        const Var parts[] = {a, b};
        return tc::sum(tc::mul(tc::concat_rows(parts), Var::constant(w64)));
      },
      {a, b});
}

TEST(Autodiff, MatmulGatherNormSoftmaxLossesPassGradcheck) {
  std::mt19937_64 rng(4);
  Var a = Var::parameter(rand_matrix(3, 5, rng));
  Var b = Var::parameter(rand_matrix(5, 2, rng));
  Var bt = Var::parameter(rand_matrix(4, 5, rng));
  const Matrix w32 = rand_matrix(3, 2, rng), w34 = rand_matrix(3, 4, rng), w35 = rand_matrix(3, 5, rng);
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::matmul(a, b), Var::constant(w32))); }, {a, b});
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::matmul_nt(a, bt), Var::constant(w34))); }, {a, bt});

  Var table = Var::parameter(rand_matrix(6, 3, rng));
  const std::vector<int> ids{2, 0, 2, 5};
  const Matrix w43 = rand_matrix(4, 3, rng);
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::gather_rows(table, ids), Var::constant(w43))); }, {table});

  Var gain = Var::parameter(rand_matrix(1, 5, rng));
  Var bias = Var::parameter(rand_matrix(1, 5, rng));
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::layer_norm(a, gain, bias), Var::constant(w35))); },
                   {a, gain, bias});

  Matrix allow(3, 5, 1.0);
  allow(0, 4) = 0.0;
  allow(2, 0) = 0.0;
  expect_gradcheck([&] { return tc::sum(tc::mul(tc::masked_softmax_rows(a, allow), Var::constant(w35))); }, {a});

  const std::vector<int> targets{4, 0, 2};
  expect_gradcheck([&] { return tc::cross_entropy_sum(a, targets); }, {a});
  Var logits = Var::parameter(rand_matrix(2, 3, rng));
  Matrix y(2, 3);
  y[0] = 1.0;
  y[4] = 0.5;
  expect_gradcheck([&] { return tc::binary_cross_entropy_sum(tc::sigmoid(logits), y); }, {logits});
}

TEST(Autodiff, MaskedSoftmaxGivesZeroWeightToMaskedKeys) {
  std::mt19937_64 rng(5);
  Var s = Var::constant(rand_matrix(2, 4, rng));
  Matrix allow(2, 4, 1.0);
  allow(0, 1) = 0.0;
  const Var p = tc::masked_softmax_rows(s, allow);
  EXPECT_EQ(p.value()(0, 1), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < 4; ++c) total += p.value()(0, c);
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Autodiff, NoGradGuardRecordsNothing) {
  Var a = Var::parameter(Matrix(1, 1, 2.0));
  tc::NoGradGuard guard;
  const Var y = tc::mul(a, a);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Encoder, PooledStateIgnoresPaddingRows) {
  std::mt19937_64 rng(6);
  tc::ParamStore store;
  const auto cfg = toy();
  tc::Encoder enc(store, "enc", cfg, rng);
  const tc::ForwardContext ctx;
  Matrix x = rand_matrix(5, 8, rng);
  const bool keep[] = {true, true, true, false, false};
  const Var h1 = tc::masked_mean_rows(enc(Var::constant(x), keep, ctx), keep);
  for (std::size_t c = 0; c < 8; ++c) {
    std::swap(x(3, c), x(4, c));
    x(4, c) += 3.0;
  }
  const Var h2 = tc::masked_mean_rows(enc(Var::constant(x), keep, ctx), keep);
  EXPECT_EQ(h1.value(), h2.value());
}

TEST(Encoder, AllPaddingIsAnError) {
  Var s = Var::constant(Matrix(2, 3, 1.0));
  const bool keep[] = {false, false};
  EXPECT_THROW(tc::masked_mean_rows(s, keep), perspex::ArgumentError);
}

TEST(Encoder, SingleTokenPoolEqualsItsState) {
  std::mt19937_64 rng(7);
  tc::ParamStore store;
  auto cfg = toy();
  cfg.n_layers = 1;
  tc::Encoder enc(store, "enc", cfg, rng);
  const bool keep[] = {true};
  const Var states = enc(Var::constant(rand_matrix(1, 8, rng)), keep, {});
  EXPECT_EQ(tc::masked_mean_rows(states, keep).value(), states.value());
}

TEST(Encoder, PooledStatePassesGradcheckAgainstEmbeddings) {
  std::mt19937_64 rng(8);
  tc::ParamStore store;
  tc::Encoder enc(store, "enc", toy(), rng);
  Var x = Var::parameter(rand_matrix(4, 8, rng));
  const bool keep[] = {true, true, true, false};
  const Matrix w = rand_matrix(1, 8, rng);
  std::vector<Var> in{x};
  const auto rep = tc::gradcheck(
      [&] { return tc::sum(tc::mul(tc::masked_mean_rows(enc(x, keep, {}), keep), Var::constant(w))); }, in);
  EXPECT_LT(rep.max_rel_error, 1e-4);
}

TEST(Decoder, LogitsAtPositionTIgnoreLaterTargets) {
  std::mt19937_64 rng(9);
  tc::ParamStore store;
  tc::Decoder dec(store, "dec", toy(), rng);
  const Var memory = Var::constant(rand_matrix(3, 8, rng));
  const bool mem_keep[] = {true, true, true};
  Matrix y = rand_matrix(4, 8, rng);
  const Matrix before = dec(Var::constant(y), memory, mem_keep, {}).value();
  for (std::size_t c = 0; c < 8; ++c) y(2, c) += 1.0;
  const Matrix after = dec(Var::constant(y), memory, mem_keep, {}).value();
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(before(t, c), after(t, c));
  EXPECT_NE(before(2, 0), after(2, 0));
}

TEST(Decoder, MaskedMemoryRowHasNoInfluence) {
  std::mt19937_64 rng(10);
  tc::ParamStore store;
  tc::Decoder dec(store, "dec", toy(), rng);
  Matrix mem = rand_matrix(3, 8, rng);
  const bool keep[] = {true, false, true};
  const Var y = Var::constant(rand_matrix(2, 8, rng));
  const Matrix before = dec(y, Var::constant(mem), keep, {}).value();
  for (std::size_t c = 0; c < 8; ++c) mem(1, c) = 100.0;
  EXPECT_EQ(before, dec(y, Var::constant(mem), keep, {}).value());
}

TEST(Dropout, DisabledForwardIsPure) {
  std::mt19937_64 rng(11), drop_rng(12);
  tc::ParamStore store;
  auto cfg = toy();
  cfg.dropout = 0.5;
  tc::Encoder enc(store, "enc", cfg, rng);
  const Var x = Var::constant(rand_matrix(3, 8, rng));
  const bool keep[] = {true, true, true};
  tc::ForwardContext eval{false, 0.5, &drop_rng};
  EXPECT_EQ(enc(x, keep, eval).value(), enc(x, keep, eval).value());
  tc::ForwardContext train{true, 0.5, &drop_rng};
  EXPECT_NE(enc(x, keep, train).value(), enc(x, keep, eval).value());
}

TEST(AdamW, ZeroGradientAndNoDecayLeavesParamsUnchanged) {
  tc::ParamStore store;
  Var p = store.create("p", Matrix(2, 2, 0.7));
  p.node()->grad_buffer();
  tc::AdamW opt({0.0, 0.9, 0.999, 1e-8});
  opt.step(store, 0.1);
  EXPECT_EQ(p.value(), Matrix(2, 2, 0.7));
}

TEST(AdamW, SingleScalarStepMatchesHandDerivation) {
  tc::ParamStore store;
  Var p = store.create("p", Matrix(1, 1, 1.0));
  p.node()->grad_buffer()[0] = 0.5;
  tc::AdamW opt({0.01, 0.9, 0.999, 1e-8});
  opt.step(store, 0.1);
  // m = 0.05, v = 0.00025; bias-corrected m_hat = 0.5, v_hat = 0.25.
  const double decayed = 1.0 - 0.1 * 0.01 * 1.0;
  const double expected = decayed - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p.value()[0], expected, 1e-15);
}

TEST(AdamW, AbsentGradientSkipsParameter) {
  tc::ParamStore store;
  Var p = store.create("p", Matrix(1, 1, 1.0));
  tc::AdamW opt;
  opt.step(store, 0.1);
  EXPECT_EQ(p.value()[0], 1.0);
}

TEST(AdamW, NonFiniteGradientAborts) {
  tc::ParamStore store;
  Var p = store.create("layer.w", Matrix(1, 1, 1.0));
  p.node()->grad_buffer()[0] = std::nan("");
  tc::AdamW opt;
  try {
    opt.step(store, 0.1);
    FAIL() << "expected DivergenceError";
  } catch (const perspex::DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.w"), std::string::npos);
  }
}

TEST(Schedule, WarmupThenLinearDecay) {
  const tc::LinearWarmupSchedule s(1e-3, 100, 0.06);
  EXPECT_EQ(s.warmup_steps(), 6u);
  EXPECT_EQ(s.lr_at(0), 0.0);
  EXPECT_DOUBLE_EQ(s.lr_at(6), 1e-3);
  EXPECT_DOUBLE_EQ(s.lr_at(3), 0.5e-3);
  EXPECT_DOUBLE_EQ(s.lr_at(53), 1e-3 * 47.0 / 94.0);
  EXPECT_EQ(s.lr_at(100), 0.0);
}

TEST(Clip, SmallNormUnchanged) {
  std::vector<std::vector<double>> g{{0.3, 0.4}};
  EXPECT_DOUBLE_EQ(tc::clip_global_norm(g, 1.0), 0.5);
  EXPECT_EQ(g[0], (std::vector<double>{0.3, 0.4}));
}

TEST(Clip, LargeNormScaledToOne) {
  std::vector<std::vector<double>> g{{2.0, 2.0}, {2.0, 2.0}};
  EXPECT_DOUBLE_EQ(tc::clip_global_norm(g, 1.0), 4.0);
  double sq = 0.0;
  for (const auto& v : g)
    for (double x : v) sq += x * x;
  EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12);
}

TEST(Clip, RandomVectorsNeverExceedMaxNorm) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> d(0.0, 3.0);
  std::uniform_int_distribution<int> len(1, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> g(static_cast<std::size_t>(len(rng)) % 4 + 1);
    for (auto& v : g) {
      v.resize(static_cast<std::size_t>(len(rng)));
      for (auto& x : v) x = d(rng);
    }
    tc::clip_global_norm(g, 1.0);
    double sq = 0.0;
    for (const auto& v : g)
      for (double x : v) sq += x * x;
    ASSERT_LE(std::sqrt(sq), 1.0 + 1e-12);
  }
}

TEST(Clip, StoreVariantScalesGradients) {
  tc::ParamStore store;
  Var p = store.create("p", Matrix(1, 2));
  p.node()->grad_buffer()[0] = 3.0;
  p.node()->grad_buffer()[1] = 4.0;
  EXPECT_DOUBLE_EQ(tc::clip_global_norm(store, 1.0), 5.0);
  EXPECT_NEAR(p.grad()[0], 0.6, 1e-15);
  EXPECT_NEAR(p.grad()[1], 0.8, 1e-15);
}

TEST(ParamStore, CountAndChecksumAreDeterministic) {
  auto build = [] {
    std::mt19937_64 rng(14);
    tc::ParamStore store;
    tc::Encoder enc(store, "enc", toy(), rng);
    return store;
  };
  const auto a = build();
  const auto b = build();
  EXPECT_EQ(a.parameter_count(), b.parameter_count());
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_GT(a.parameter_count(), 0u);
  a.params()[0].var.mutable_value()[0] += 1e-12;
  EXPECT_NE(a.checksum(), b.checksum());
}

TEST(Checkpoint, RoundTripRestoresValuesAndOptimizerState) {
  const auto dir = perspex::testing::scratch_dir("ckpt");
  std::mt19937_64 rng(15);
  tc::ParamStore store;
  tc::Linear lin(store, "lin", 3, 2, rng);
  for (const auto& p : store.params()) p.var.node()->grad_buffer().fill(0.1);
  tc::AdamW opt;
  opt.step(store, 0.01);
  const auto ckpt = tc::make_checkpoint("test", {{"note", "x"}}, store, &opt);
  tc::save_checkpoint(dir / "a.ckpt", ckpt);
  const auto back = tc::load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(back.kind, "test");
  EXPECT_EQ(back.meta["note"], "x");
  EXPECT_EQ(back.optimizer_steps, 1u);
  EXPECT_EQ(back.param_checksum, store.checksum());

  std::mt19937_64 rng2(99);
  tc::ParamStore fresh;
  tc::Linear lin2(fresh, "lin", 3, 2, rng2);
  tc::restore_params(fresh, back);
  EXPECT_EQ(fresh.checksum(), store.checksum());
}

TEST(Checkpoint, CorruptOrMissingFilesAreReported) {
  const auto dir = perspex::testing::scratch_dir("ckpt_bad");
  EXPECT_THROW(tc::load_checkpoint(dir / "none.ckpt"), perspex::ArtifactError);
  {
    std::ofstream f(dir / "bad.ckpt");
    f << "garbage";
  }
  EXPECT_THROW(tc::load_checkpoint(dir / "bad.ckpt"), perspex::ParseError);
}

TEST(Checkpoint, ShapeMismatchOnRestoreFails) {
  std::mt19937_64 rng(16);
  tc::ParamStore a, b;
  tc::Linear la(a, "lin", 3, 2, rng);
  tc::Linear lb(b, "lin", 3, 4, rng);
  EXPECT_THROW(tc::restore_params(b, tc::make_checkpoint("t", {}, a)), perspex::Error);
}

TEST(Config, UnknownKeysRejectedAndInvariantsChecked) {
  tc::ModelConfig m;
  EXPECT_THROW(tc::from_json(nlohmann::json{{"d_modle", 64}}, m), perspex::ArgumentError);
  tc::from_json(nlohmann::json{{"d_model", 32}}, m);
  EXPECT_EQ(m.d_model, 32);
  EXPECT_EQ(m.n_layers, 2);
  m.n_heads = 5;
  EXPECT_THROW(m.validate(), perspex::ArgumentError);
  tc::TrainConfig t;
  t.patience = 0;
  EXPECT_THROW(t.validate(), perspex::ArgumentError);
  nlohmann::json j = tc::TrainConfig::explainer_defaults();
  EXPECT_DOUBLE_EQ(j["lr"].get<double>(), 8e-5);
}

TEST(Config, DefaultsFollowTheSetup) {
  const tc::ModelConfig m;
  EXPECT_EQ(m.d_model, 64);
  EXPECT_EQ(m.annotator_embed_dim, 64);
  EXPECT_EQ(m.max_len_explainer_in, 512);
  EXPECT_EQ(m.max_len_explainer_out, 128);
  EXPECT_EQ(m.max_len_classifier, 256);
  const auto t = tc::TrainConfig::classifier_defaults();
  EXPECT_DOUBLE_EQ(t.lr, 2e-5);
  EXPECT_DOUBLE_EQ(t.warmup_ratio, 0.06);
  EXPECT_DOUBLE_EQ(t.clip_max_norm, 1.0);
  EXPECT_EQ(t.patience, 3);
  EXPECT_DOUBLE_EQ(t.lambda_soft, 1.0);
}
