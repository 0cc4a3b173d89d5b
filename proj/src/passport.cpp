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

#include "perspex/passport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>

#include "perspex/error.hpp"
#include "perspex/metrics.hpp"
#include "perspex/tc/optim.hpp"

namespace perspex::passport {

using corpus::AnnotatorProfile;
using nlohmann::json;
using tc::Matrix;
using tc::Var;

namespace {

std::size_t index_in(const std::vector<std::string>& values, const std::string& v, const char* what) {
  auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) throw ArgumentError(std::string("unknown ") + what + ": " + v);
  return static_cast<std::size_t>(it - values.begin());
}

json profile_json(const AnnotatorProfile& p) {
  return {{"id", p.id}, {"gender", p.gender}, {"age", p.age}, {"nationality", p.nationality},
          {"education", p.education}};
}

AnnotatorProfile profile_from(const json& j) {
  AnnotatorProfile p;
  p.id = j.at("id").get<std::string>();
  p.gender = j.at("gender").get<std::string>();
  p.age = j.at("age").get<int>();
  p.nationality = j.at("nationality").get<std::string>();
  p.education = j.at("education").get<std::string>();
  return p;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- metadata

MetadataFeaturizer::MetadataFeaturizer(corpus::MetadataSchema schema, int min_age, int max_age)
    : schema_(std::move(schema)), min_age_(min_age), max_age_(max_age) {
  if (min_age > max_age) throw ArgumentError("metadata age range is inverted");
}

MetadataFeaturizer MetadataFeaturizer::from_corpus(const corpus::Corpus& corpus) {
  if (corpus.annotators().empty()) throw ArgumentError("corpus has no annotators");
  int lo = corpus.annotators().front().age, hi = lo;
  for (const auto& a : corpus.annotators()) {
    lo = std::min(lo, a.age);
    hi = std::max(hi, a.age);
  }
  return MetadataFeaturizer(corpus.schema(), lo, hi);
}

std::size_t MetadataFeaturizer::dim() const {
  return schema_.genders.size() + schema_.nationalities.size() + schema_.educations.size() + 1;
}

std::vector<double> MetadataFeaturizer::features(const AnnotatorProfile& p) const {
  std::vector<double> f(dim(), 0.0);
  std::size_t off = 0;
  f[off + index_in(schema_.genders, p.gender, "gender")] = 1.0;
  off += schema_.genders.size();
  f[off + index_in(schema_.nationalities, p.nationality, "nationality")] = 1.0;
  off += schema_.nationalities.size();
  f[off + index_in(schema_.educations, p.education, "education")] = 1.0;
  off += schema_.educations.size();
  f[off] = max_age_ == min_age_
               ? 0.5
               : static_cast<double>(p.age - min_age_) / static_cast<double>(max_age_ - min_age_);
  return f;
}

json MetadataFeaturizer::to_json() const {
  return {{"genders", schema_.genders},
          {"nationalities", schema_.nationalities},
          {"educations", schema_.educations},
          {"min_age", min_age_},
          {"max_age", max_age_}};
}

MetadataFeaturizer MetadataFeaturizer::from_json(const json& j) {
  corpus::MetadataSchema s;
  s.genders = j.at("genders").get<std::vector<std::string>>();
  s.nationalities = j.at("nationalities").get<std::vector<std::string>>();
  s.educations = j.at("educations").get<std::vector<std::string>>();
  return MetadataFeaturizer(std::move(s), j.at("min_age").get<int>(), j.at("max_age").get<int>());
}

// ---------------------------------------------------------------- model

Var fuse_parts(const Var& h, const Var& u, const Var& m) {
  const Var parts[] = {h, u, m};
  return tc::concat_cols(parts);
}

std::vector<int> classifier_input(const corpus::Instance& inst, const text::Vocab& vocab,
                                  std::size_t max_len) {
  return text::encode(inst.context + " | " + inst.statement, vocab, max_len, true);
}

PassportClassifier::PassportClassifier(tc::ModelConfig cfg, std::size_t vocab_size,
                                       std::vector<AnnotatorProfile> annotators, MetadataFeaturizer featurizer)
    : cfg_(std::move(cfg)),
      vocab_size_(vocab_size),
      annotators_(std::move(annotators)),
      featurizer_(std::move(featurizer)) {
  cfg_.validate();
  if (annotators_.empty()) throw ArgumentError("classifier needs at least one annotator");
  std::mt19937_64 rng(cfg_.seed);
  const auto d = static_cast<std::size_t>(cfg_.d_model);
  const auto e = static_cast<std::size_t>(cfg_.annotator_embed_dim);
  const auto m = static_cast<std::size_t>(cfg_.metadata_dim);
  embed = tc::Embedding(store_, "cls.embed", vocab_size_, d, rng);
  encoder = tc::Encoder(store_, "cls.encoder", cfg_, rng);
  annotator_table = store_.create("cls.annotators", tc::normal_matrix(annotators_.size(), e, 0.02, rng));
  meta_proj = tc::Linear(store_, "cls.meta", featurizer_.dim(), m, rng);
  const std::size_t f = d + e + m;
  if (cfg_.head_hidden > 0) {
    const auto hh = static_cast<std::size_t>(cfg_.head_hidden);
    head_hidden = tc::Linear(store_, "cls.head.hidden", f, hh, rng);
    head_out = tc::Linear(store_, "cls.head.out", hh, corpus::kNumLabels, rng);
  } else {
    head_out = tc::Linear(store_, "cls.head.out", f, corpus::kNumLabels, rng);
  }
  meta_features_ = Matrix(annotators_.size(), featurizer_.dim());
  for (std::size_t j = 0; j < annotators_.size(); ++j) {
    const auto feats = featurizer_.features(annotators_[j]);
    std::copy(feats.begin(), feats.end(), meta_features_.row(j).begin());
  }
}

std::size_t PassportClassifier::annotator_index(std::string_view id) const {
  for (std::size_t j = 0; j < annotators_.size(); ++j) {
    if (annotators_[j].id == id) return j;
  }
  throw ArgumentError("unknown annotator: " + std::string(id));
}

std::size_t PassportClassifier::fused_dim() const {
  return static_cast<std::size_t>(cfg_.d_model + cfg_.annotator_embed_dim + cfg_.metadata_dim);
}

Var PassportClassifier::pooled(std::span<const int> ids, const tc::ForwardContext& ctx) const {
  if (ids.empty()) throw ArgumentError("classifier input is empty");
  // std::vector<bool> is bit-packed, so the mask lives in a plain array.
  std::unique_ptr<bool[]> keep(new bool[ids.size()]);
  for (std::size_t i = 0; i < ids.size(); ++i) keep[i] = ids[i] != text::kPad;
  std::span<const bool> mask(keep.get(), ids.size());
  Var x = tc::add_constant(embed(ids), tc::sinusoidal_positions(ids.size(), static_cast<std::size_t>(cfg_.d_model)));
  Var states = encoder(x, mask, ctx);
  return tc::masked_mean_rows(states, mask);
}

Var PassportClassifier::fuse(const Var& h, std::size_t annotator) const {
  if (annotator >= annotators_.size()) throw ArgumentError("annotator index out of range");
  const int row[] = {static_cast<int>(annotator)};
  Var u = tc::gather_rows(annotator_table, row);
  Matrix feats(1, featurizer_.dim());
  std::copy(meta_features_.row(annotator).begin(), meta_features_.row(annotator).end(), feats.row(0).begin());
  Var m = meta_proj(Var::constant(std::move(feats)));
  return fuse_parts(h, u, m);
}

Var PassportClassifier::fuse_all(const Var& h) const {
  std::vector<int> rows(annotators_.size(), 0);
  Var hs = tc::gather_rows(h, rows);
  Var m = meta_proj(Var::constant(meta_features_));
  return fuse_parts(hs, annotator_table, m);
}

Var PassportClassifier::logits(const Var& z) const {
  if (z.cols() != fused_dim()) throw ArgumentError("fused representation has the wrong width");
  if (cfg_.head_hidden > 0) return head_out(tc::tanh(head_hidden(z)));
  return head_out(z);
}

ClassProbabilities PassportClassifier::classify(const Var& z) const {
  tc::NoGradGuard guard;
  const Var l = logits(z);
  return {sigmoid(l.value()(0, 0)), sigmoid(l.value()(0, 1)), sigmoid(l.value()(0, 2))};
}

std::vector<ClassProbabilities> PassportClassifier::predict(std::span<const int> ids) const {
  tc::NoGradGuard guard;
  const Var l = logits(fuse_all(pooled(ids, tc::ForwardContext{})));
  std::vector<ClassProbabilities> out(annotators_.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t c = 0; c < corpus::kNumLabels; ++c) out[j][c] = sigmoid(l.value()(j, c));
  }
  return out;
}

Matrix PassportClassifier::fused_value(std::span<const int> ids, std::size_t annotator) const {
  tc::NoGradGuard guard;
  return fuse(pooled(ids, tc::ForwardContext{}), annotator).value();
}

// ---------------------------------------------------------------- losses

double focal_term(double p, int y, double alpha, double gamma) {
  if (y != 0) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
  return -std::pow(p, gamma) * std::log(1.0 - p);
}

Var masked_focal_bce(const Var& logits, const Matrix& labels, std::span<const std::uint8_t> mask,
                     const ClassWeights& alpha, double gamma) {
  if (logits.cols() != corpus::kNumLabels || !logits.value().same_shape(labels) || mask.size() != logits.rows()) {
    throw ArgumentError("masked_focal_bce: shape mismatch");
  }
  if (gamma < 0.0) throw ArgumentError("focal gamma must be >= 0");
  for (double a : alpha) {
    if (!(a > 0.0)) throw ArgumentError("class weights must be positive");
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (mask[r]) rows.push_back(r);
  }
  if (rows.empty()) throw ArgumentError("masked_focal_bce: every cell is masked");
  const double norm = 1.0 / static_cast<double>(rows.size());

  // Per observed cell: y = 1 -> -a q^g log p, y = 0 -> -p^g log q, with
  // p = sigmoid(x), q = sigmoid(-x), log p = -softplus(-x), log q = -softplus(x).
  Matrix dloss(logits.rows(), corpus::kNumLabels);
  double total = 0.0;
  for (auto r : rows) {
    for (std::size_t c = 0; c < corpus::kNumLabels; ++c) {
      const double x = logits.value()(r, c);
      const double p = sigmoid(x), q = sigmoid(-x);
      if (labels(r, c) > 0.5) {
        const double logp = -softplus(-x);
        const double qg = std::pow(q, gamma);
        total += -alpha[c] * qg * logp;
        dloss(r, c) = alpha[c] * (gamma * qg * p * logp - qg * q);
      } else {
        const double logq = -softplus(x);
        const double pg = std::pow(p, gamma);
        total += -pg * logq;
        dloss(r, c) = -gamma * pg * q * logq + pg * p;
      }
    }
  }
  return tc::make_op(Matrix(1, 1, total * norm), {logits},
                     [dloss = std::move(dloss), norm](tc::Node& self) {
                       auto g = self.parents[0]->grad_buffer().values();
                       auto d = dloss.values();
                       const double g0 = self.grad[0] * norm;
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += g0 * d[i];
                     });
}

Var soft_alignment_loss(const Var& probs, std::span<const std::uint8_t> mask, std::size_t annotators,
                        std::span<const corpus::SoftTarget> soft) {
  if (annotators == 0 || probs.rows() != mask.size() || probs.cols() != corpus::kNumLabels ||
      probs.rows() != soft.size() * annotators) {
    throw ArgumentError("soft_alignment_loss: shape mismatch");
  }
  if (soft.empty()) throw ArgumentError("soft_alignment_loss: empty batch");
  const std::size_t b = soft.size();
  Matrix w(b, probs.rows());
  Matrix targets(b, corpus::kNumLabels);
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < annotators; ++j) n += mask[i * annotators + j] ? 1 : 0;
    if (n == 0) throw ArgumentError("soft_alignment_loss: instance without observed annotators");
    for (std::size_t j = 0; j < annotators; ++j) {
      if (mask[i * annotators + j]) w(i, i * annotators + j) = 1.0 / static_cast<double>(n);
    }
    for (std::size_t c = 0; c < corpus::kNumLabels; ++c) targets(i, c) = soft[i][c];
  }
  Var mean = tc::matmul(Var::constant(std::move(w)), probs);
  return tc::scale(tc::binary_cross_entropy_sum(mean, targets), 1.0 / static_cast<double>(b));
}

ClassWeights compute_class_weights(const corpus::AnnotationTensor& train) {
  std::array<std::size_t, corpus::kNumLabels> pos{}, total{};
  for (std::size_t i = 0; i < train.num_instances(); ++i) {
    for (std::size_t j = 0; j < train.num_annotators(); ++j) {
      if (!train.observed(i, j)) continue;
      for (std::size_t c = 0; c < corpus::kNumLabels; ++c) {
        ++total[c];
        pos[c] += train.label(i, j, c);
      }
    }
  }
  ClassWeights a{};
  for (std::size_t c = 0; c < corpus::kNumLabels; ++c) {
    if (pos[c] == 0) {
      throw ArgumentError(std::string("class ") + corpus::label_char(static_cast<corpus::Label>(c)) +
                          " is never positive in train");
    }
    a[c] = std::clamp(static_cast<double>(total[c] - pos[c]) / static_cast<double>(pos[c]), 0.1, 10.0);
  }
  return a;
}

// ---------------------------------------------------------------- training

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
  if (patience < 1) throw ArgumentError("patience must be >= 1");
}

bool EarlyStopper::update(double metric) {
  ++epoch_;
  if (epoch_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch_;
    stale_ = 0;
    return false;
  }
  ++stale_;
  return stale_ >= patience_;
}

Var classifier_batch_loss(const PassportClassifier& model, std::span<const std::vector<int>> inputs,
                          const corpus::AnnotationTensor& tensor, std::span<const corpus::SoftTarget> soft,
                          std::span<const std::size_t> rows, const ClassWeights& alpha, double gamma,
                          double lambda_soft, const tc::ForwardContext& ctx) {
  const std::size_t a = tensor.num_annotators();
  if (a != model.annotators().size() || inputs.size() != tensor.num_instances() || soft.size() != inputs.size()) {
    throw ArgumentError("classifier_batch_loss: inputs, tensor and model disagree");
  }
  std::vector<Var> zs;
  Matrix labels(rows.size() * a, corpus::kNumLabels);
  std::vector<std::uint8_t> mask(rows.size() * a, 0);
  std::vector<corpus::SoftTarget> batch_soft;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const std::size_t i = rows[b];
    zs.push_back(model.fuse_all(model.pooled(inputs[i], ctx)));
    batch_soft.push_back(soft[i]);
    for (std::size_t j = 0; j < a; ++j) {
      const std::size_t r = b * a + j;
      if (!tensor.observed(i, j)) continue;
      mask[r] = 1;
      for (std::size_t c = 0; c < corpus::kNumLabels; ++c) labels(r, c) = tensor.label(i, j, c);
    }
  }
  const Var logits = model.logits(tc::concat_rows(zs));
  const Var focal = masked_focal_bce(logits, labels, mask, alpha, gamma);
  const Var align = soft_alignment_loss(tc::sigmoid(logits), mask, a, batch_soft);
  return tc::add(focal, tc::scale(align, lambda_soft));
}

namespace {

struct SplitData {
  std::vector<const corpus::Instance*> instances;
  std::vector<std::vector<int>> inputs;
  corpus::AnnotationTensor tensor;
};

SplitData split_data(const corpus::Corpus& corpus, corpus::Split split, const text::Vocab& vocab,
                     std::size_t max_len) {
  SplitData d{corpus.instances_in(split), {}, corpus::build_annotation_tensor(corpus, split)};
  for (const auto* inst : d.instances) d.inputs.push_back(classifier_input(*inst, vocab, max_len));
  return d;
}

double dev_macro_f1(const PassportClassifier& model, const SplitData& dev) {
  const std::size_t a = dev.tensor.num_annotators();
  std::vector<corpus::LabelSet> preds(dev.tensor.num_instances() * a);
  const std::array<double, 3> half{0.5, 0.5, 0.5};
  for (std::size_t i = 0; i < dev.inputs.size(); ++i) {
    const auto probs = model.predict(dev.inputs[i]);
    for (std::size_t j = 0; j < a; ++j) preds[i * a + j] = calibrate::predict_label_set(probs[j], half);
  }
  return metrics::macro_f1_aggregated(preds, dev.tensor);
}

}  // namespace

ClassifierTrainResult train_classifier(const corpus::Corpus& corpus, const text::Vocab& vocab,
                                       const tc::ModelConfig& model_cfg, const tc::TrainConfig& train_cfg,
                                       std::ostream* log) {
  train_cfg.validate();
  const auto max_len = static_cast<std::size_t>(model_cfg.max_len_classifier);
  SplitData train = split_data(corpus, corpus::Split::kTrain, vocab, max_len);
  SplitData dev = split_data(corpus, corpus::Split::kDev, vocab, max_len);
  if (train.instances.empty() || dev.instances.empty()) {
    throw ArgumentError("classifier training needs non-empty train and dev splits");
  }
  const auto soft = corpus::soft_targets(train.tensor);
  const ClassWeights alpha = compute_class_weights(train.tensor);

  PassportClassifier model(model_cfg, vocab.size(), corpus.annotators(), MetadataFeaturizer::from_corpus(corpus));
  for (std::size_t j = 0; j < corpus.annotators().size(); ++j) {
    if (train.tensor.annotator_ids()[j] != model.annotators()[j].id) {
      throw InvariantError("annotator order differs between tensor and model");
    }
  }
  const std::size_t n = train.instances.size();
  const auto batch = static_cast<std::size_t>(train_cfg.batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(train_cfg.epochs);
  tc::LinearWarmupSchedule schedule(train_cfg.effective_lr(), total_steps, train_cfg.warmup_ratio);
  tc::AdamW opt({train_cfg.weight_decay, train_cfg.beta1, train_cfg.beta2, train_cfg.adam_eps});
  std::mt19937_64 rng(model_cfg.seed ^ 0x9E3779B97F4A7C15ull);
  tc::ForwardContext ctx{true, model_cfg.dropout, &rng};

  EarlyStopper stopper(train_cfg.patience);
  std::vector<Matrix> best_values;
  std::map<std::string, tc::AdamW::Moments> best_state;
  std::size_t best_steps = 0;
  json epochs = json::array();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  bool stopped_early = false;

  for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Var loss = classifier_batch_loss(model, train.inputs, train.tensor, soft, rows, alpha,
                                             train_cfg.focal_gamma, train_cfg.lambda_soft, ctx);
      if (!std::isfinite(loss.scalar())) {
        throw DivergenceError("non-finite classifier loss at step " + std::to_string(step));
      }
      loss_sum += loss.scalar();
      tc::backward(loss);
      tc::clip_global_norm(model.params(), train_cfg.clip_max_norm);
      opt.step(model.params(), schedule.lr_at(step));
      model.params().zero_grad();
      ++step;
    }
    const double f1 = dev_macro_f1(model, dev);
    const bool stop = stopper.update(f1);
    const double mean_loss = loss_sum / static_cast<double>(steps_per_epoch);
    epochs.push_back({{"epoch", epoch}, {"train_loss", mean_loss}, {"dev_macro_f1", f1}});
    if (log) *log << "epoch " << epoch << " loss " << mean_loss << " dev_macro_f1 " << f1 << "\n";
    if (stopper.best_epoch() == epoch) {
      best_values.clear();
      for (const auto& p : model.params().params()) best_values.push_back(p.var.value());
      best_state = opt.state();
      best_steps = opt.steps_taken();
    }
    if (stop) {
      stopped_early = true;
      break;
    }
  }

  const auto& ps = model.params().params();
  for (std::size_t k = 0; k < ps.size(); ++k) ps[k].var.mutable_value() = best_values[k];
  opt.restore(best_steps, std::move(best_state));

  json manifest = {{"model_config", model_cfg},
                   {"train_config", train_cfg},
                   {"class_weights", {{"C", alpha[0]}, {"E", alpha[1]}, {"N", alpha[2]}}},
                   {"epochs", epochs},
                   {"best_epoch", stopper.best_epoch()},
                   {"best_dev_macro_f1", stopper.best_metric()},
                   {"stopped_early", stopped_early},
                   {"steps", step},
                   {"warmup_steps", schedule.warmup_steps()},
                   {"parameter_count", model.params().parameter_count()},
                   {"param_checksum", model.params().checksum()}};
  tc::Checkpoint ckpt = make_classifier_checkpoint(model, vocab, {{"train", manifest}}, &opt);
  return {std::move(model), std::move(manifest), std::move(ckpt)};
}

// ---------------------------------------------------------------- artifacts

tc::Checkpoint make_classifier_checkpoint(const PassportClassifier& model, const text::Vocab& vocab,
                                          json extra, const tc::AdamW* optimizer) {
  json annotators = json::array();
  for (const auto& p : model.annotators()) annotators.push_back(profile_json(p));
  json meta = {{"model_config", model.config()},
               {"vocab_size", model.vocab_size()},
               {"vocab_checksum", vocab.checksum()},
               {"annotators", annotators},
               {"featurizer", model.featurizer().to_json()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  return tc::make_checkpoint("classifier", std::move(meta), model.params(), optimizer);
}

PassportClassifier classifier_from_checkpoint(const tc::Checkpoint& ckpt) {
  if (ckpt.kind != "classifier") throw ArtifactError("checkpoint is a " + ckpt.kind + ", not a classifier");
  try {
    std::vector<AnnotatorProfile> annotators;
    for (const auto& a : ckpt.meta.at("annotators")) annotators.push_back(profile_from(a));
    PassportClassifier model(ckpt.meta.at("model_config").get<tc::ModelConfig>(),
                             ckpt.meta.at("vocab_size").get<std::size_t>(), std::move(annotators),
                             MetadataFeaturizer::from_json(ckpt.meta.at("featurizer")));
    tc::restore_params(model.params(), ckpt);
    return model;
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed classifier checkpoint: ") + e.what());
  }
}

PassportClassifier load_classifier(const std::filesystem::path& path) {
  return classifier_from_checkpoint(tc::load_checkpoint(path));
}

PredictionDump predict_split(const PassportClassifier& model, const text::Vocab& vocab,
                             const corpus::Corpus& corpus, corpus::Split split) {
  const auto tensor = corpus::build_annotation_tensor(corpus, split);
  PredictionDump dump;
  dump.instance_ids = tensor.instance_ids();
  dump.annotator_ids = tensor.annotator_ids();
  std::vector<std::size_t> cols;
  for (const auto& id : dump.annotator_ids) cols.push_back(model.annotator_index(id));
  const auto max_len = static_cast<std::size_t>(model.config().max_len_classifier);
  const auto insts = corpus.instances_in(split);
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto probs = model.predict(classifier_input(*insts[i], vocab, max_len));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      dump.probs.push_back(probs[cols[j]]);
      dump.observed.push_back(tensor.observed(i, j) ? 1 : 0);
    }
  }
  return dump;
}

void save_predictions(const PredictionDump& dump, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  const std::size_t a = dump.annotator_ids.size();
  for (std::size_t k = 0; k < dump.probs.size(); ++k) {
    const auto& p = dump.probs[k];
    json rec = {{"instance_id", dump.instance_ids[k / a]},
                {"annotator_id", dump.annotator_ids[k % a]},
                {"observed", dump.observed[k] != 0},
                {"p_C", p[0]},
                {"p_E", p[1]},
                {"p_N", p[2]}};
    out << rec.dump() << "\n";
  }
}

PredictionDump load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing prediction dump " + path.string());
  PredictionDump dump;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto rec = json::parse(line);
      const auto iid = rec.at("instance_id").get<std::string>();
      const auto aid = rec.at("annotator_id").get<std::string>();
      if (dump.instance_ids.empty() || dump.instance_ids.back() != iid) dump.instance_ids.push_back(iid);
      if (dump.instance_ids.size() == 1) dump.annotator_ids.push_back(aid);
      dump.probs.push_back({rec.at("p_C").get<double>(), rec.at("p_E").get<double>(), rec.at("p_N").get<double>()});
      dump.observed.push_back(rec.at("observed").get<bool>() ? 1 : 0);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (dump.annotator_ids.empty() || dump.probs.size() != dump.instance_ids.size() * dump.annotator_ids.size()) {
    throw ParseError(path.string() + ": prediction dump is not a full instance x annotator grid");
  }
  return dump;
}

}  // namespace perspex::passport
