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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "perspex/corpus.hpp"

namespace perspex::synth {

/// Rule-based annotator for the synthetic corpus. `rules` maps each cue
/// keyword to a label set rendering ("E N"); `templates` maps "C"/"E"/"N"
/// to a rationale with a "{cue}" slot.
struct Persona {
  corpus::AnnotatorProfile profile;
  std::map<std::string, std::string> rules;
  std::map<std::string, std::string> templates;
};

struct SyntheticSpec {
  std::size_t n_instances = 200;
  std::uint64_t seed = 7;
  std::vector<double> split_ratios{0.7, 0.15, 0.15};
  std::vector<std::string> cues;
  /// Personas without rules get a seeded rule table over `cues`.
  std::vector<Persona> personas;

  /// Four personas and eight cues.
  static SyntheticSpec defaults();
  /// Throws ArgumentError for missing templates, unknown cues, empty rules,
  /// ratios that do not sum to 1, or templates that repeat within a persona.
  void validate() const;
};

/// Strict: unknown keys are rejected.
SyntheticSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SyntheticSpec& s);

struct SyntheticCorpus {
  corpus::Corpus corpus;
  /// Resolved rules and templates, per-instance cue and label sets, and
  /// counts tallied while generating (for the statistics audit).
  nlohmann::json answer_key;
};

/// Deterministic given the spec (including its seed).
SyntheticCorpus generate(const SyntheticSpec& spec);

/// Renders persona `p`'s rationale for `label` on `cue`.
std::string render_rationale(const Persona& p, corpus::Label label, const std::string& cue);

/// Fraction of judgments whose label set equals the key's rule output.
double audit_labels(const corpus::Corpus& corpus, const nlohmann::json& answer_key);

/// Compares corpus_stats against the counts in the key; returns one message
/// per mismatch (empty when everything agrees).
std::vector<std::string> audit_stats(const corpus::Corpus& corpus, const nlohmann::json& answer_key);

/// `n` instances, one judgment each (annotators in rotation), a single
/// label and a unique random rationale. The train split is repeated as the
/// dev split under different ids so a run can be scored on what it saw.
corpus::Corpus memorization_corpus(std::size_t n = 16, std::uint64_t seed = 11);

}  // namespace perspex::synth
