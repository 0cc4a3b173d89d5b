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

#include "perspex/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "perspex/error.hpp"
#include "perspex/faithfulness.hpp"
#include "perspex/gradcheck_suite.hpp"
#include "perspex/passport.hpp"
#include "perspex/text.hpp"

namespace perspex::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kGradcheckLimit = 1e-4;
constexpr int kGradcheckSeeds = 5;

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Appends the standard record and returns `result`.
json finish(const RunDir& dir, const RunConfig& cfg, const std::string& command, const std::string& corpus_checksum,
            json result, std::initializer_list<std::string> artifacts) {
  json arts = json::object();
  for (const auto& a : artifacts) arts[a] = file_checksum(dir.path(a));
  json record = {{"command", command}, {"config", to_json(cfg)}, {"artifacts", arts}, {"result", result}};
  if (!corpus_checksum.empty()) record["corpus_checksum"] = corpus_checksum;
  dir.append(std::move(record));
  return result;
}

struct Loaded {
  corpus::Corpus corpus;
  std::string checksum;
};

Loaded load_corpus_of(const RunConfig& cfg) {
  const fs::path p = cfg.corpus_path();
  if (!fs::exists(p)) throw ArtifactError("missing corpus " + p.string() + " (run import or synth first)");
  return {corpus::load_corpus(p), file_checksum(p)};
}

text::Vocab load_vocab(const RunDir& dir) {
  return text::Vocab::load(dir.require("vocab.json", "train-classifier"));
}

passport::PassportClassifier load_classifier(const RunDir& dir) {
  return passport::load_classifier(dir.require("classifier.ckpt", "train-classifier"));
}

void check_vocab(const tc::Checkpoint& ckpt, const text::Vocab& vocab, const std::string& what) {
  if (ckpt.meta.value("vocab_checksum", std::string()) != vocab.checksum()) {
    throw ArtifactError(what + " was trained with a different vocabulary");
  }
}

}  // namespace

// ---------------------------------------------------------------- config

tc::TrainConfig RunConfig::default_classifier_train() {
  auto c = tc::TrainConfig::classifier_defaults();
  c.lr_multiplier = 150.0;
  c.batch_size = 16;
  return c;
}

tc::TrainConfig RunConfig::default_explainer_train() {
  auto c = tc::TrainConfig::explainer_defaults();
  c.lr_multiplier = 12.5;
  c.batch_size = 16;
  return c;
}

void RunConfig::resolve() {
  classifier_model.seed = seed;
  explainer_model.seed = seed;
  if (!synth_seed_given) synth.seed = seed;
}

void RunConfig::validate() const {
  classifier_model.validate();
  classifier_train.validate();
  explainer_model.validate();
  explainer_train.validate();
  synth.validate();
  if (vocab_min_freq < 1) throw ArgumentError("vocab_min_freq must be >= 1");
  if (decoding.beam_width < 1) throw ArgumentError("decoding.beam_width must be >= 1");
  if (decoding.max_len < 1) throw ArgumentError("decoding.max_len must be >= 1");
  calibrate::threshold_grid(threshold_step);
}

fs::path RunConfig::corpus_path() const { return corpus.empty() ? out / "corpus.jsonl" : corpus; }

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("run config must be a JSON object");
  tc::check_known_keys(j,
                       {"corpus", "out", "seed", "vocab_min_freq", "classifier", "explainer", "thresholds",
                        "decoding", "eval_split", "synth"},
                       "run config");
  RunConfig c;
  try {
    if (j.contains("corpus")) c.corpus = j["corpus"].get<std::string>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("vocab_min_freq")) c.vocab_min_freq = j["vocab_min_freq"].get<int>();
    if (j.contains("eval_split")) c.eval_split = corpus::parse_split(j["eval_split"].get<std::string>());
    if (j.contains("classifier")) {
      const auto& s = j["classifier"];
      tc::check_known_keys(s, {"model", "train"}, "classifier");
      if (s.contains("model")) tc::from_json(s["model"], c.classifier_model);
      if (s.contains("train")) tc::from_json(s["train"], c.classifier_train);
    }
    if (j.contains("explainer")) {
      const auto& s = j["explainer"];
      tc::check_known_keys(s, {"model", "train", "bridge_label_block"}, "explainer");
      if (s.contains("model")) tc::from_json(s["model"], c.explainer_model);
      if (s.contains("train")) tc::from_json(s["train"], c.explainer_train);
      if (s.contains("bridge_label_block")) c.bridge_label_block = s["bridge_label_block"].get<bool>();
    }
    if (j.contains("thresholds")) {
      const auto& s = j["thresholds"];
      tc::check_known_keys(s, {"mode", "step"}, "thresholds");
      if (s.contains("mode")) c.threshold_mode = calibrate::parse_mode(s["mode"].get<std::string>());
      if (s.contains("step")) c.threshold_step = s["step"].get<double>();
    }
    if (j.contains("decoding")) {
      const auto& s = j["decoding"];
      tc::check_known_keys(s, {"beam_width", "max_len"}, "decoding");
      if (s.contains("beam_width")) c.decoding.beam_width = s["beam_width"].get<std::size_t>();
      if (s.contains("max_len")) c.decoding.max_len = s["max_len"].get<std::size_t>();
    }
    if (j.contains("synth")) {
      c.synth = synth::spec_from_json(j["synth"]);
      c.synth_seed_given = j["synth"].contains("seed");
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ArtifactError("missing config " + path.string());
  return run_config_from_json(read_json(path));
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"vocab_min_freq", c.vocab_min_freq},
          {"eval_split", corpus::split_name(c.eval_split)},
          {"classifier", {{"model", c.classifier_model}, {"train", c.classifier_train}}},
          {"explainer",
           {{"model", c.explainer_model},
            {"train", c.explainer_train},
            {"bridge_label_block", c.bridge_label_block}}},
          {"thresholds", {{"mode", calibrate::mode_name(c.threshold_mode)}, {"step", c.threshold_step}}},
          {"decoding", c.decoding.to_json()},
          {"synth", synth::spec_to_json(c.synth)}};
}

std::string file_checksum(const fs::path& path) { return hex64(fnv1a(read_file(path))); }

// ---------------------------------------------------------------- run dir

RunDir::RunDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path RunDir::require(const std::string& name, const std::string& producer) const {
  const fs::path p = path(name);
  if (!fs::exists(p)) throw ArtifactError("missing " + p.string() + " (run " + producer + " first)");
  return p;
}

json RunDir::manifest() const {
  const fs::path p = path("manifest.json");
  if (!fs::exists(p)) return {{"runs", json::array()}};
  return read_json(p);
}

void RunDir::append(json record) const {
  json m = manifest();
  m["runs"].push_back(std::move(record));
  write_json(path("manifest.json"), m);
}

std::string predictions_name(corpus::Split split) {
  return "predictions_" + std::string(corpus::split_name(split)) + ".jsonl";
}

std::string explainer_name(explainer::ExplainerMode mode) {
  return "explainer_" + std::string(explainer::mode_name(mode)) + ".ckpt";
}

std::string generations_name(explainer::ExplainerMode mode, corpus::Split split) {
  return "generations_" + std::string(explainer::mode_name(mode)) + "_" + std::string(corpus::split_name(split)) +
         ".jsonl";
}

// ---------------------------------------------------------------- commands

json cmd_import(const RunConfig& cfg, const fs::path& release_dir) {
  const RunDir dir(cfg.out);
  const auto c = corpus::import_lewidi(release_dir);
  const fs::path p = cfg.corpus_path();
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  corpus::save_corpus(c, p);
  const std::string sum = file_checksum(p);
  json result = {{"instances", c.instances().size()},
                 {"judgments", c.judgment_count()},
                 {"annotations", c.pair_count()},
                 {"annotators", c.annotators().size()}};
  return finish(dir, cfg, "import", sum, result, {});
}

json cmd_synth(const RunConfig& cfg) {
  const RunDir dir(cfg.out);
  const auto syn = synth::generate(cfg.synth);
  const fs::path p = cfg.corpus_path();
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  corpus::save_corpus(syn.corpus, p);
  write_json(dir.path("answer_key.json"), syn.answer_key);
  const auto mismatches = synth::audit_stats(syn.corpus, syn.answer_key);
  json result = {{"instances", syn.corpus.instances().size()},
                 {"judgments", syn.corpus.judgment_count()},
                 {"label_audit", synth::audit_labels(syn.corpus, syn.answer_key)},
                 {"stats_mismatches", mismatches}};
  return finish(dir, cfg, "synth", file_checksum(p), result, {"answer_key.json"});
}

json cmd_stats(const RunConfig& cfg) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  json result = corpus::stats_to_json(corpus::corpus_stats(loaded.corpus));
  write_json(dir.path("stats.json"), result);
  if (fs::exists(dir.path("answer_key.json"))) {
    result["answer_key_mismatches"] = synth::audit_stats(loaded.corpus, read_json(dir.path("answer_key.json")));
  }
  return finish(dir, cfg, "stats", loaded.checksum, result, {"stats.json"});
}

json cmd_train_classifier(const RunConfig& cfg, std::ostream* log) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto vocab = text::build_vocab(loaded.corpus, cfg.vocab_min_freq);
  vocab.save(dir.path("vocab.json"));
  auto res = passport::train_classifier(loaded.corpus, vocab, cfg.classifier_model, cfg.classifier_train, log);
  tc::save_checkpoint(dir.path("classifier.ckpt"), res.checkpoint);
  json dumps = json::array();
  for (auto split : {corpus::Split::kDev, corpus::Split::kTest}) {
    if (loaded.corpus.instances_in(split).empty()) continue;
    passport::save_predictions(passport::predict_split(res.model, vocab, loaded.corpus, split),
                               dir.path(predictions_name(split)));
    dumps.push_back(predictions_name(split));
  }
  json result = res.manifest;
  result["vocab_size"] = vocab.size();
  result["vocab_checksum"] = vocab.checksum();
  json arts = {{"vocab.json", file_checksum(dir.path("vocab.json"))},
               {"classifier.ckpt", file_checksum(dir.path("classifier.ckpt"))}};
  for (const auto& d : dumps) arts[d.get<std::string>()] = file_checksum(dir.path(d.get<std::string>()));
  dir.append({{"command", "train-classifier"},
              {"config", to_json(cfg)},
              {"corpus_checksum", loaded.checksum},
              {"artifacts", arts},
              {"result", result}});
  return result;
}

json cmd_tune_thresholds(const RunConfig& cfg) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto dump = passport::load_predictions(dir.require(predictions_name(corpus::Split::kDev), "train-classifier"));
  const auto gold = corpus::build_annotation_tensor(loaded.corpus, corpus::Split::kDev);
  if (dump.instance_ids != gold.instance_ids() || dump.annotator_ids != gold.annotator_ids()) {
    throw AlignmentError("dev prediction dump does not align with the corpus");
  }
  const auto tuned = calibrate::tune_thresholds(dump.probs, gold, cfg.threshold_mode, cfg.threshold_step);
  write_json(dir.path("thresholds.json"), calibrate::to_json(tuned.config));
  json result = {{"mode", calibrate::mode_name(tuned.config.mode)},
                 {"step", tuned.config.step},
                 {"tau", calibrate::to_json(tuned.config)["tau"]},
                 {"dev_mean_jaccard", tuned.mean_jaccard},
                 {"points_evaluated", tuned.points_evaluated}};
  return finish(dir, cfg, "tune-thresholds", loaded.checksum, result, {"thresholds.json"});
}

json cmd_train_explainer(const RunConfig& cfg, explainer::ExplainerMode mode, std::ostream* log) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto vocab = load_vocab(dir);
  const auto cls_path = dir.require("classifier.ckpt", "train-classifier");
  const std::string cls_file_sum = file_checksum(cls_path);
  const auto cls_ckpt = tc::load_checkpoint(cls_path);
  check_vocab(cls_ckpt, vocab, "classifier");
  const auto classifier = passport::classifier_from_checkpoint(cls_ckpt);
  explainer::ExplainerOptions opts{mode, cfg.bridge_label_block};
  auto res = explainer::train_explainer(loaded.corpus, vocab, classifier, cfg.explainer_model, cfg.explainer_train,
                                        opts, log);
  if (file_checksum(cls_path) != cls_file_sum) throw InvariantError("classifier checkpoint changed on disk");
  const std::string name = explainer_name(mode);
  tc::save_checkpoint(dir.path(name), res.checkpoint);
  return finish(dir, cfg, "train-explainer", loaded.checksum, res.manifest, {name});
}

json cmd_generate(const RunConfig& cfg, explainer::ExplainerMode mode) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto vocab = load_vocab(dir);
  const auto classifier = load_classifier(dir);
  const auto ckpt = tc::load_checkpoint(dir.require(explainer_name(mode), "train-explainer --mode " +
                                                                           std::string(explainer::mode_name(mode))));
  check_vocab(ckpt, vocab, "explainer");
  const auto model = explainer::explainer_from_checkpoint(ckpt);
  const auto gens = explainer::generate_split(model, classifier, vocab, loaded.corpus, cfg.eval_split, cfg.decoding);
  const std::string name = generations_name(mode, cfg.eval_split);
  explainer::save_generations(gens, dir.path(name));
  std::size_t empty = 0;
  for (const auto& g : gens) empty += g.empty ? 1 : 0;
  json result = {{"mode", explainer::mode_name(mode)},
                 {"split", corpus::split_name(cfg.eval_split)},
                 {"generated", gens.size()},
                 {"empty", empty},
                 {"decoding", cfg.decoding.to_json()}};
  return finish(dir, cfg, "generate", loaded.checksum, result, {name});
}

json cmd_evaluate(const RunConfig& cfg, explainer::ExplainerMode mode) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto vocab = load_vocab(dir);
  const auto dump = passport::load_predictions(dir.require(predictions_name(cfg.eval_split), "train-classifier"));
  const auto thresholds = calibrate::threshold_config_from_json(read_json(dir.require("thresholds.json",
                                                                                      "tune-thresholds")));
  const auto model = explainer::load_explainer(dir.require(explainer_name(mode), "train-explainer"));
  const auto gens = explainer::load_generations(dir.require(generations_name(mode, cfg.eval_split), "generate"));
  const auto report =
      metrics::evaluate(loaded.corpus, cfg.eval_split, dump, thresholds, gens, model, vocab);
  json result = metrics::to_json(report);
  result["mode"] = explainer::mode_name(mode);
  result["split"] = corpus::split_name(cfg.eval_split);
  const std::string name = "eval_" + std::string(explainer::mode_name(mode)) + "_" +
                           std::string(corpus::split_name(cfg.eval_split)) + ".json";
  write_json(dir.path(name), result);
  return finish(dir, cfg, "evaluate", loaded.checksum, result, {name});
}

json cmd_faithfulness(const RunConfig& cfg, explainer::ExplainerMode mode) {
  const RunDir dir(cfg.out);
  const auto loaded = load_corpus_of(cfg);
  const auto vocab = load_vocab(dir);
  const auto judge = load_classifier(dir);
  const auto model = explainer::load_explainer(dir.require(explainer_name(mode), "train-explainer"));
  const auto gens = explainer::load_generations(dir.require(generations_name(mode, cfg.eval_split), "generate"));
  const auto report = metrics::faithfulness_report(gens, loaded.corpus, judge, model, vocab);

  const std::string stem =
      "faithfulness_" + std::string(explainer::mode_name(mode)) + "_" + std::string(corpus::split_name(cfg.eval_split));
  json full = metrics::to_json(report);
  write_json(dir.path(stem + ".json"), full);
  // Plot-ready columns.
  {
    std::ofstream tsv(dir.path(stem + ".tsv"), std::ios::binary);
    tsv << "instance_id\tannotator_id\tsemantic_similarity\trouge_l\tentailment\n";
    tsv.precision(17);
    for (const auto& it : report.items) {
      tsv << it.instance_id << '\t' << it.annotator_id << '\t' << it.semantic_similarity << '\t' << it.rouge_l
          << '\t' << it.entailment << '\n';
    }
  }
  json result = full;
  result.erase("items");
  result["mode"] = explainer::mode_name(mode);
  result["split"] = corpus::split_name(cfg.eval_split);
  return finish(dir, cfg, "faithfulness", loaded.checksum, result, {stem + ".json", stem + ".tsv"});
}

json cmd_gradcheck(const RunConfig& cfg) {
  const RunDir dir(cfg.out);
  json seeds = json::array();
  double worst = 0.0;
  for (int k = 0; k < kGradcheckSeeds; ++k) {
    const auto checks = run_gradcheck_suite(cfg.seed + static_cast<std::uint64_t>(k));
    for (const auto& c : checks) worst = std::max(worst, c.max_rel_error);
    seeds.push_back({{"seed", cfg.seed + static_cast<std::uint64_t>(k)}, {"blocks", to_json(checks)}});
  }
  json result = {{"eps", 1e-4}, {"limit", kGradcheckLimit}, {"max_rel_error", worst},
                 {"passed", worst < kGradcheckLimit}, {"seeds", seeds}};
  write_json(dir.path("gradcheck.json"), result);
  finish(dir, cfg, "gradcheck", "", result, {"gradcheck.json"});
  if (worst >= kGradcheckLimit) {
    std::ostringstream msg;
    msg << "gradient check failed: max relative error " << worst;
    throw InvariantError(msg.str());
  }
  return result;
}

}  // namespace perspex::pipeline
