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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "perspex/calibrate.hpp"
#include "perspex/corpus.hpp"
#include "perspex/explainer.hpp"
#include "perspex/synth.hpp"
#include "perspex/tc/config.hpp"

namespace perspex::pipeline {

/// Everything a command needs. Parsed strictly from one JSON file; the
/// command-line flags are applied on top.
struct RunConfig {
  /// Canonical corpus; empty means <out>/corpus.jsonl.
  std::filesystem::path corpus;
  std::filesystem::path out = "run";
  /// Seeds both models (and the synthetic generator unless its section
  /// names its own seed).
  std::uint64_t seed = 13;
  int vocab_min_freq = 1;
  tc::ModelConfig classifier_model;
  tc::TrainConfig classifier_train = default_classifier_train();
  tc::ModelConfig explainer_model;
  tc::TrainConfig explainer_train = default_explainer_train();
  bool bridge_label_block = false;
  calibrate::ThresholdMode threshold_mode = calibrate::ThresholdMode::kPerClass;
  double threshold_step = 0.05;
  explainer::DecodingOptions decoding;
  corpus::Split eval_split = corpus::Split::kTest;
  synth::SyntheticSpec synth = synth::SyntheticSpec::defaults();
  bool synth_seed_given = false;

  static tc::TrainConfig default_classifier_train();
  static tc::TrainConfig default_explainer_train();

  /// Pushes `seed` into the model configs (and the synthetic spec).
  void resolve();
  void validate() const;
  std::filesystem::path corpus_path() const;
};

/// Strict: unknown keys anywhere are rejected with ArgumentError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
/// Resolved config without filesystem paths, so that manifests of two runs
/// in different directories can be compared byte for byte.
nlohmann::json to_json(const RunConfig& c);

/// Hex FNV-1a 64 of a file's bytes. Throws ArtifactError when unreadable.
std::string file_checksum(const std::filesystem::path& path);

/// Output directory of one run. Every command appends one record to
/// <out>/manifest.json.
class RunDir {
 public:
  explicit RunDir(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  /// Path of an artifact a previous command must have produced; throws
  /// ArtifactError naming the producing command otherwise.
  std::filesystem::path require(const std::string& name, const std::string& producer) const;

  nlohmann::json manifest() const;
  void append(nlohmann::json record) const;

 private:
  std::filesystem::path root_;
};

/// Command entry points. Each returns its result record (also appended to
/// the manifest with the resolved config and artifact checksums). `log`
/// receives per-epoch progress when non-null.
nlohmann::json cmd_import(const RunConfig& cfg, const std::filesystem::path& release_dir);
nlohmann::json cmd_synth(const RunConfig& cfg);
nlohmann::json cmd_stats(const RunConfig& cfg);
nlohmann::json cmd_train_classifier(const RunConfig& cfg, std::ostream* log = nullptr);
nlohmann::json cmd_tune_thresholds(const RunConfig& cfg);
nlohmann::json cmd_train_explainer(const RunConfig& cfg, explainer::ExplainerMode mode, std::ostream* log = nullptr);
nlohmann::json cmd_generate(const RunConfig& cfg, explainer::ExplainerMode mode);
nlohmann::json cmd_evaluate(const RunConfig& cfg, explainer::ExplainerMode mode);
nlohmann::json cmd_faithfulness(const RunConfig& cfg, explainer::ExplainerMode mode);
/// Five seeds starting at cfg.seed; throws InvariantError (after writing
/// the report) when a block reaches 1e-4.
nlohmann::json cmd_gradcheck(const RunConfig& cfg);

/// Artifact names, shared with tests.
std::string predictions_name(corpus::Split split);
std::string explainer_name(explainer::ExplainerMode mode);
std::string generations_name(explainer::ExplainerMode mode, corpus::Split split);

}  // namespace perspex::pipeline
