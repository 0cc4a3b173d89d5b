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

#include "perspex/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>

#include "perspex/error.hpp"
#include "perspex/tc/optim.hpp"

namespace perspex::explainer {

using nlohmann::json;
using tc::Matrix;
using tc::Var;

std::string_view mode_name(ExplainerMode m) { return m == ExplainerMode::kPosthoc ? "posthoc" : "bridge"; }

ExplainerMode parse_mode(std::string_view name) {
  if (name == "posthoc") return ExplainerMode::kPosthoc;
  if (name == "bridge") return ExplainerMode::kBridge;
  throw ArgumentError("unknown explainer mode: " + std::string(name));
}

// ---------------------------------------------------------------- prompts

std::string render_persona(const corpus::AnnotatorProfile& p) {
  return p.gender + ", age " + std::to_string(p.age) + ", " + p.nationality + ", " + p.education;
}

std::string gold_label_block(corpus::LabelSet labels) { return labels.to_string(); }

std::string probs_label_block(const passport::ClassProbabilities& p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "probs C=%.3f E=%.3f N=%.3f", p[0], p[1], p[2]);
  return buf;
}

std::string Prompt::text() const {
  std::string s = text::control_token(annotator_id) + " persona: " + persona + " | context: " + context +
                  " | statement: " + statement;
  if (label_block) s += " | labels: " + *label_block;
  return s;
}

Prompt build_prompt(const corpus::Instance& inst, const corpus::AnnotatorProfile& profile,
                    std::optional<std::string> label_block) {
  return {profile.id, render_persona(profile), inst.context, inst.statement, std::move(label_block)};
}

std::vector<int> encode_prompt(const Prompt& prompt, const text::Vocab& vocab, std::size_t max_len) {
  auto ids_of = [&](const std::string& s) {
    std::vector<int> ids;
    for (const auto& t : text::tokenize(s)) ids.push_back(vocab.id_of(t));
    return ids;
  };
  const auto head = ids_of("persona: " + prompt.persona + " | context:");
  auto context = ids_of(prompt.context);
  std::string tail_text = "| statement: " + prompt.statement;
  if (prompt.label_block) tail_text += " | labels: " + *prompt.label_block;
  const auto tail = ids_of(tail_text);
  const std::size_t fixed = 2 + head.size() + tail.size();  // control token and EOS
  if (fixed > max_len) {
    throw ArgumentError("prompt for annotator " + prompt.annotator_id + " exceeds " + std::to_string(max_len) +
                        " tokens even without context");
  }
  if (fixed + context.size() > max_len) context.resize(max_len - fixed);
  std::vector<int> ids;
  ids.reserve(fixed + context.size());
  ids.push_back(vocab.control_id(prompt.annotator_id));
  ids.insert(ids.end(), head.begin(), head.end());
  ids.insert(ids.end(), context.begin(), context.end());
  ids.insert(ids.end(), tail.begin(), tail.end());
  ids.push_back(text::kEos);
  return ids;
}

// ---------------------------------------------------------------- bridge

PrefixBridge::PrefixBridge(tc::ParamStore& store, const std::string& name, std::size_t in_dim,
                           std::size_t hidden, std::size_t prefix_len, std::size_t d_model,
                           std::mt19937_64& rng)
    : first(store, name + ".first", in_dim, hidden, rng),
      second(store, name + ".second", hidden, prefix_len * d_model, rng),
      in_dim_(in_dim),
      k_(prefix_len),
      d_(d_model) {}

Var PrefixBridge::operator()(const Var& z) const {
  if (z.rows() != 1 || z.cols() != in_dim_) {
    throw ArgumentError("bridge input width " + std::to_string(z.cols()) + " does not match " +
                        std::to_string(in_dim_));
  }
  return tc::reshape(second(tc::tanh(first(z))), k_, d_);
}

json DecodingOptions::to_json() const {
  return {{"strategy", beam_width > 1 ? "beam" : "greedy"}, {"beam_width", beam_width}, {"max_len", max_len}};
}

// ---------------------------------------------------------------- model

Explainer::Explainer(tc::ModelConfig cfg, std::size_t vocab_size, ExplainerMode mode, std::size_t fused_dim,
                     bool bridge_label_block)
    : cfg_(std::move(cfg)),
      vocab_size_(vocab_size),
      mode_(mode),
      fused_dim_(mode == ExplainerMode::kBridge ? fused_dim : 0),
      bridge_label_block_(mode == ExplainerMode::kBridge && bridge_label_block) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed + 1);
  const auto d = static_cast<std::size_t>(cfg_.d_model);
  embed = tc::Embedding(store_, "gen.embed", vocab_size_, d, rng);
  encoder = tc::Encoder(store_, "gen.encoder", cfg_, rng);
  decoder = tc::Decoder(store_, "gen.decoder", cfg_, rng);
  out = tc::Linear(store_, "gen.out", d, vocab_size_, rng);
  if (mode_ == ExplainerMode::kBridge) {
    if (fused_dim == 0) throw ArgumentError("bridge mode needs the classifier's fused width");
    bridge.emplace(store_, "bridge", fused_dim, static_cast<std::size_t>(cfg_.bridge_hidden),
                   static_cast<std::size_t>(cfg_.prefix_len), d, rng);
  }
}

namespace {

std::vector<int> decoder_input(std::span<const int> target) {
  std::vector<int> in{text::kBos};
  in.insert(in.end(), target.begin(), target.end() - 1);
  return in;
}

// All-true key mask in contiguous storage.
struct AllTrue {
  explicit AllTrue(std::size_t n) : data(new bool[n]), size(n) { std::fill_n(data.get(), n, true); }
  std::span<const bool> span() const { return {data.get(), size}; }
  std::unique_ptr<bool[]> data;
  std::size_t size;
};

}  // namespace

Var Explainer::encode(std::span<const int> prompt, const Matrix* z, const tc::ForwardContext& ctx) const {
  if (prompt.empty()) throw ArgumentError("empty prompt");
  Var x = embed(prompt);
  if (bridge && cfg_.prefix_len > 0) {
    if (!z) throw ArgumentError("bridge explainer needs a fused representation");
    const Var parts[] = {(*bridge)(Var::constant(*z)), x};
    x = tc::concat_rows(parts);
  }
  x = tc::add_constant(x, tc::sinusoidal_positions(x.rows(), static_cast<std::size_t>(cfg_.d_model)));
  AllTrue mask(x.rows());
  return encoder(x, mask.span(), ctx);
}

Var Explainer::decode_logits(const Var& memory, std::span<const int> decoder_in,
                             const tc::ForwardContext& ctx) const {
  Var y = tc::add_constant(embed(decoder_in),
                           tc::sinusoidal_positions(decoder_in.size(), static_cast<std::size_t>(cfg_.d_model)));
  AllTrue mask(memory.rows());
  return out(decoder(y, memory, mask.span(), ctx));
}

Var Explainer::example_loss_sum(const Example& ex, const tc::ForwardContext& ctx) const {
  if (ex.target.empty() || ex.target.back() != text::kEos) throw ArgumentError("target must end with EOS");
  const Var memory = encode(ex.prompt, ex.z.empty() ? nullptr : &ex.z, ctx);
  const auto in = decoder_input(ex.target);
  return tc::cross_entropy_sum(decode_logits(memory, in, ctx), ex.target);
}

Var Explainer::batch_loss(std::span<const Example> batch, const tc::ForwardContext& ctx) const {
  if (batch.empty()) throw ArgumentError("empty batch");
  std::size_t tokens = 0;
  Var total;
  for (const auto& ex : batch) {
    tokens += ex.target.size();
    const Var l = example_loss_sum(ex, ctx);
    total = total ? tc::add(total, l) : l;
  }
  return tc::scale(total, 1.0 / static_cast<double>(tokens));
}

namespace {

std::vector<double> last_row_logits(const Var& hidden_logits) {
  const Matrix& v = hidden_logits.value();
  auto row = v.row(v.rows() - 1);
  return {row.begin(), row.end()};
}

std::vector<double> log_softmax(const std::vector<double>& l) {
  const double mx = *std::max_element(l.begin(), l.end());
  double s = 0.0;
  for (double x : l) s += std::exp(x - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) out[i] = l[i] - lse;
  return out;
}

}  // namespace

Decoded Explainer::generate(std::span<const int> prompt, const Matrix* z, const DecodingOptions& opts) const {
  if (opts.beam_width == 0) throw ArgumentError("beam width must be >= 1");
  tc::NoGradGuard guard;
  const tc::ForwardContext ctx;
  const Var memory = encode(prompt, z, ctx);
  const std::size_t max_len = std::min<std::size_t>(opts.max_len, static_cast<std::size_t>(cfg_.max_len_explainer_out));

  auto step_logits = [&](const std::vector<int>& generated) {
    std::vector<int> in{text::kBos};
    in.insert(in.end(), generated.begin(), generated.end());
    return last_row_logits(decode_logits(memory, in, ctx));
  };

  if (opts.beam_width == 1) {
    Decoded d;
    while (d.ids.size() < max_len) {
      const auto l = step_logits(d.ids);
      const int next = static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
      if (next == text::kEos) break;
      d.ids.push_back(next);
    }
    d.empty = d.ids.empty();
    return d;
  }

  struct Hyp {
    std::vector<int> ids;
    double logp = 0.0;
    bool done = false;
  };
  std::vector<Hyp> beams{Hyp{}};
  for (std::size_t t = 0; t < max_len; ++t) {
    std::vector<Hyp> cand;
    for (const auto& h : beams) {
      if (h.done) {
        cand.push_back(h);
        continue;
      }
      const auto lp = log_softmax(step_logits(h.ids));
      std::vector<int> order(lp.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t keep = std::min(opts.beam_width, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                        [&](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
      for (std::size_t k = 0; k < keep; ++k) {
        Hyp n = h;
        n.logp += lp[order[k]];
        if (order[k] == text::kEos) n.done = true;
        else n.ids.push_back(order[k]);
        cand.push_back(std::move(n));
      }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Hyp& a, const Hyp& b) { return a.logp > b.logp; });
    if (cand.size() > opts.beam_width) cand.resize(opts.beam_width);
    beams = std::move(cand);
    if (std::all_of(beams.begin(), beams.end(), [](const Hyp& h) { return h.done; })) break;
  }
  // Length-normalized score; the EOS step counts as a token.
  const auto score = [](const Hyp& h) { return h.logp / static_cast<double>(h.ids.size() + (h.done ? 1 : 0)); };
  const Hyp* best = &beams.front();
  for (const auto& h : beams) {
    if (score(h) > score(*best)) best = &h;
  }
  return {best->ids, best->ids.empty()};
}

std::vector<double> Explainer::text_vector(std::span<const int> ids, bool embedding_probe) const {
  if (ids.empty()) throw ArgumentError("cannot embed an empty text");
  tc::NoGradGuard guard;
  AllTrue mask(ids.size());
  Var states = embed(ids);
  if (!embedding_probe) {
    states = tc::add_constant(states, tc::sinusoidal_positions(ids.size(), static_cast<std::size_t>(cfg_.d_model)));
    states = encoder(states, mask.span(), tc::ForwardContext{});
  }
  const Var pooled = tc::masked_mean_rows(states, mask.span());
  return {pooled.value().values().begin(), pooled.value().values().end()};
}

// ---------------------------------------------------------------- data

namespace {

std::vector<int> encode_target(const std::string& rationale, const text::Vocab& vocab, std::size_t max_out) {
  auto ids = text::encode(rationale, vocab, std::numeric_limits<std::size_t>::max(), false);
  if (max_out == 0) throw ArgumentError("target length limit must be positive");
  if (ids.size() > max_out - 1) ids.resize(max_out - 1);
  ids.push_back(text::kEos);
  return ids;
}

}  // namespace

Prompt inference_prompt(const Explainer& model, const passport::PassportClassifier& classifier,
                        const text::Vocab& vocab, const corpus::Instance& inst,
                        const corpus::AnnotatorProfile& profile) {
  if (model.mode() == ExplainerMode::kBridge && !model.bridge_label_block()) {
    return build_prompt(inst, profile, std::nullopt);
  }
  const auto ids = passport::classifier_input(inst, vocab, static_cast<std::size_t>(classifier.config().max_len_classifier));
  const auto probs = classifier.predict(ids)[classifier.annotator_index(profile.id)];
  if (model.mode() == ExplainerMode::kPosthoc) return build_prompt(inst, profile, probs_label_block(probs));
  return build_prompt(inst, profile, gold_label_block(calibrate::predict_label_set(probs, {0.5, 0.5, 0.5})));
}

std::vector<Example> build_examples(const corpus::Corpus& corpus, corpus::Split split, const text::Vocab& vocab,
                                    const passport::PassportClassifier& classifier, const tc::ModelConfig& cfg,
                                    const ExplainerOptions& opts) {
  std::vector<Example> out;
  const auto max_in = static_cast<std::size_t>(cfg.max_len_explainer_in);
  const auto max_out = static_cast<std::size_t>(cfg.max_len_explainer_out);
  const auto cls_len = static_cast<std::size_t>(classifier.config().max_len_classifier);
  for (const auto* inst : corpus.instances_in(split)) {
    std::vector<int> cls_ids;
    for (const auto& j : inst->judgments) {
      const auto& profile = corpus.annotator(j.annotator_id);
      std::optional<std::string> block;
      if (opts.mode == ExplainerMode::kPosthoc || opts.bridge_label_block) block = gold_label_block(j.label_set());
      const auto prompt = encode_prompt(build_prompt(*inst, profile, block), vocab, max_in);
      Matrix z;
      if (opts.mode == ExplainerMode::kBridge) {
        if (cls_ids.empty()) cls_ids = passport::classifier_input(*inst, vocab, cls_len);
        z = classifier.fused_value(cls_ids, classifier.annotator_index(j.annotator_id));
      }
      for (const auto& pair : j.pairs) out.push_back({prompt, encode_target(pair.rationale, vocab, max_out), z});
    }
  }
  return out;
}

// ---------------------------------------------------------------- training

ExplainerTrainResult train_explainer(const corpus::Corpus& corpus, const text::Vocab& vocab,
                                     const passport::PassportClassifier& classifier,
                                     const tc::ModelConfig& model_cfg, const tc::TrainConfig& train_cfg,
                                     const ExplainerOptions& opts, std::ostream* log) {
  train_cfg.validate();
  const std::string frozen = classifier.params().checksum();
  auto check_frozen = [&](const char* when) {
    if (classifier.params().checksum() != frozen) {
      throw InvariantError(std::string("classifier parameters changed ") + when);
    }
  };
  const auto train = build_examples(corpus, corpus::Split::kTrain, vocab, classifier, model_cfg, opts);
  const auto dev = build_examples(corpus, corpus::Split::kDev, vocab, classifier, model_cfg, opts);
  if (train.empty() || dev.empty()) throw ArgumentError("explainer training needs non-empty train and dev splits");

  Explainer model(model_cfg, vocab.size(), opts.mode, classifier.fused_dim(), opts.bridge_label_block);
  const std::size_t n = train.size();
  const auto batch = static_cast<std::size_t>(train_cfg.batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  tc::LinearWarmupSchedule schedule(train_cfg.effective_lr(), steps_per_epoch * static_cast<std::size_t>(train_cfg.epochs),
                                    train_cfg.warmup_ratio);
  tc::AdamW opt({train_cfg.weight_decay, train_cfg.beta1, train_cfg.beta2, train_cfg.adam_eps});
  std::mt19937_64 rng(model_cfg.seed ^ 0xC2B2AE3D27D4EB4Full);
  const tc::ForwardContext ctx{true, model_cfg.dropout, &rng};

  passport::EarlyStopper stopper(train_cfg.patience);
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
      std::vector<Example> items;
      for (std::size_t b = start; b < std::min(n, start + batch); ++b) items.push_back(train[order[b]]);
      const Var loss = model.batch_loss(items, ctx);
      if (!std::isfinite(loss.scalar())) {
        throw DivergenceError("non-finite explainer loss at step " + std::to_string(step));
      }
      loss_sum += loss.scalar();
      tc::backward(loss);
      tc::clip_global_norm(model.params(), train_cfg.clip_max_norm);
      opt.step(model.params(), schedule.lr_at(step));
      model.params().zero_grad();
      ++step;
    }
    double dev_loss;
    {
      tc::NoGradGuard guard;
      dev_loss = model.batch_loss(dev, tc::ForwardContext{}).scalar();
    }
    check_frozen("during explainer training");
    const bool stop = stopper.update(-dev_loss);
    const double mean_loss = loss_sum / static_cast<double>(steps_per_epoch);
    epochs.push_back({{"epoch", epoch}, {"train_loss", mean_loss}, {"dev_loss", dev_loss}});
    if (log) *log << "epoch " << epoch << " loss " << mean_loss << " dev_loss " << dev_loss << "\n";
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
  check_frozen("after explainer training");

  json manifest = {{"mode", mode_name(opts.mode)},
                   {"bridge_label_block", opts.bridge_label_block},
                   {"model_config", model_cfg},
                   {"train_config", train_cfg},
                   {"train_examples", train.size()},
                   {"dev_examples", dev.size()},
                   {"epochs", epochs},
                   {"best_epoch", stopper.best_epoch()},
                   {"best_dev_loss", -stopper.best_metric()},
                   {"stopped_early", stopped_early},
                   {"steps", step},
                   {"warmup_steps", schedule.warmup_steps()},
                   {"parameter_count", model.params().parameter_count()},
                   {"param_checksum", model.params().checksum()},
                   {"classifier_checksum", frozen}};
  tc::Checkpoint ckpt = make_explainer_checkpoint(model, vocab, {{"train", manifest}, {"classifier_checksum", frozen}}, &opt);
  return {std::move(model), std::move(manifest), std::move(ckpt)};
}

// ---------------------------------------------------------------- artifacts

tc::Checkpoint make_explainer_checkpoint(const Explainer& model, const text::Vocab& vocab, json extra,
                                         const tc::AdamW* optimizer) {
  json meta = {{"model_config", model.config()},
               {"mode", mode_name(model.mode())},
               {"vocab_size", model.vocab_size()},
               {"vocab_checksum", vocab.checksum()},
               {"fused_dim", model.fused_dim()},
               {"bridge_label_block", model.bridge_label_block()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  return tc::make_checkpoint("explainer", std::move(meta), model.params(), optimizer);
}

Explainer explainer_from_checkpoint(const tc::Checkpoint& ckpt) {
  if (ckpt.kind != "explainer") throw ArtifactError("checkpoint is a " + ckpt.kind + ", not an explainer");
  try {
    Explainer model(ckpt.meta.at("model_config").get<tc::ModelConfig>(), ckpt.meta.at("vocab_size").get<std::size_t>(),
                    parse_mode(ckpt.meta.at("mode").get<std::string>()), ckpt.meta.at("fused_dim").get<std::size_t>(),
                    ckpt.meta.at("bridge_label_block").get<bool>());
    tc::restore_params(model.params(), ckpt);
    return model;
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed explainer checkpoint: ") + e.what());
  }
}

Explainer load_explainer(const std::filesystem::path& path) {
  return explainer_from_checkpoint(tc::load_checkpoint(path));
}

// ---------------------------------------------------------------- generation

GeneratedExplanation generate_one(const Explainer& model, const passport::PassportClassifier& classifier,
                                  const text::Vocab& vocab, const corpus::Corpus& corpus,
                                  const corpus::Instance& inst, std::string_view annotator_id,
                                  const DecodingOptions& opts) {
  const auto& profile = corpus.annotator(annotator_id);
  const Prompt prompt = inference_prompt(model, classifier, vocab, inst, profile);
  const auto ids = encode_prompt(prompt, vocab, static_cast<std::size_t>(model.config().max_len_explainer_in));
  Matrix z;
  if (model.mode() == ExplainerMode::kBridge) {
    if (classifier.fused_dim() != model.fused_dim()) {
      throw ArgumentError("classifier and bridge explainer have incompatible widths");
    }
    z = classifier.fused_value(
        passport::classifier_input(inst, vocab, static_cast<std::size_t>(classifier.config().max_len_classifier)),
        classifier.annotator_index(annotator_id));
  }
  const Decoded d = model.generate(ids, z.empty() ? nullptr : &z, opts);
  GeneratedExplanation g;
  g.instance_id = inst.id;
  g.annotator_id = std::string(annotator_id);
  g.mode = model.mode();
  g.text = text::detokenize(text::decode(d.ids, vocab));
  g.token_count = d.ids.size();
  g.empty = d.empty;
  g.prompt = prompt.text();
  g.decoding = opts.to_json();
  return g;
}

std::vector<GeneratedExplanation> generate_split(const Explainer& model,
                                                 const passport::PassportClassifier& classifier,
                                                 const text::Vocab& vocab, const corpus::Corpus& corpus,
                                                 corpus::Split split, const DecodingOptions& opts) {
  std::vector<GeneratedExplanation> out;
  for (const auto* inst : corpus.instances_in(split)) {
    for (const auto& j : inst->judgments) {
      out.push_back(generate_one(model, classifier, vocab, corpus, *inst, j.annotator_id, opts));
    }
  }
  return out;
}

void save_generations(const std::vector<GeneratedExplanation>& items, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  for (const auto& g : items) {
    json rec = {{"instance_id", g.instance_id},
                {"annotator_id", g.annotator_id},
                {"mode", mode_name(g.mode)},
                {"text", g.text},
                {"token_count", g.token_count},
                {"empty", g.empty},
                {"decoding", g.decoding},
                {"prompt", g.prompt}};
    out << rec.dump() << "\n";
  }
}

std::vector<GeneratedExplanation> load_generations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing generation dump " + path.string());
  std::vector<GeneratedExplanation> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto rec = json::parse(line);
      GeneratedExplanation g;
      g.instance_id = rec.at("instance_id").get<std::string>();
      g.annotator_id = rec.at("annotator_id").get<std::string>();
      g.mode = parse_mode(rec.at("mode").get<std::string>());
      g.text = rec.at("text").get<std::string>();
      g.token_count = rec.at("token_count").get<std::size_t>();
      g.empty = rec.at("empty").get<bool>();
      g.decoding = rec.at("decoding");
      g.prompt = rec.at("prompt").get<std::string>();
      items.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

}  // namespace perspex::explainer
