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

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace perspex::corpus {

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split s);
/// Accepts "train", "dev", "test". Throws ArgumentError otherwise.
Split parse_split(std::string_view name);
inline constexpr std::array<Split, 3> kAllSplits{Split::kTrain, Split::kDev, Split::kTest};

/// NLI classes in their fixed tensor order: C, E, N.
enum class Label : int { kC = 0, kE = 1, kN = 2 };
inline constexpr std::array<Label, 3> kAllLabels{Label::kC, Label::kE, Label::kN};
inline constexpr std::size_t kNumLabels = 3;

char label_char(Label l);
/// "C"/"E"/"N" or the full class names, case-insensitive.
std::optional<Label> parse_label(std::string_view text);

/// Subset of {C, E, N}.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  static constexpr LabelSet from_bits(std::uint8_t bits) { return LabelSet(bits & 0x7u); }

  constexpr bool contains(Label l) const { return (bits_ >> static_cast<int>(l)) & 1u; }
  constexpr void insert(Label l) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(l)); }
  constexpr std::size_t size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr LabelSet intersect(LabelSet o) const { return LabelSet(bits_ & o.bits_); }
  constexpr LabelSet unite(LabelSet o) const { return LabelSet(bits_ | o.bits_); }

  /// Canonical rendering in C < E < N order, space separated: "E N".
  std::string to_string() const;

  friend constexpr bool operator==(LabelSet, LabelSet) = default;

 private:
  constexpr explicit LabelSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

struct AnnotatorProfile {
  std::string id;
  std::string gender;
  int age = 0;
  std::string nationality;
  std::string education;

  friend bool operator==(const AnnotatorProfile&, const AnnotatorProfile&) = default;
};

struct LabelRationale {
  Label label;
  std::string rationale;

  friend bool operator==(const LabelRationale&, const LabelRationale&) = default;
};

struct AnnotatorJudgment {
  std::string instance_id;
  std::string annotator_id;
  std::vector<LabelRationale> pairs;

  LabelSet label_set() const;
  friend bool operator==(const AnnotatorJudgment&, const AnnotatorJudgment&) = default;
};

struct Instance {
  std::string id;
  std::string context;
  std::string statement;
  Split split = Split::kTrain;
  /// Ordered by annotator id.
  std::vector<AnnotatorJudgment> judgments;

  const AnnotatorJudgment* judgment_for(std::string_view annotator_id) const;
  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Declared category vocabularies for annotator metadata.
struct MetadataSchema {
  std::vector<std::string> genders;
  std::vector<std::string> nationalities;
  std::vector<std::string> educations;

  friend bool operator==(const MetadataSchema&, const MetadataSchema&) = default;
};

/// Validated, immutable collection of instances and annotators.
class Corpus {
 public:
  Corpus() = default;
  /// Checks every invariant; throws InvariantError naming the offending record.
  /// An empty schema is derived from the annotator records (sorted, unique).
  Corpus(std::vector<AnnotatorProfile> annotators, std::vector<Instance> instances,
         MetadataSchema schema = {});

  const std::vector<AnnotatorProfile>& annotators() const { return annotators_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const MetadataSchema& schema() const { return schema_; }

  std::optional<std::size_t> annotator_index(std::string_view id) const;
  const AnnotatorProfile& annotator(std::string_view id) const;
  const Instance* find_instance(std::string_view id) const;
  std::vector<const Instance*> instances_in(Split split) const;
  std::size_t judgment_count() const;
  /// Number of (label, rationale) pairs.
  std::size_t pair_count() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<AnnotatorProfile> annotators_;
  std::vector<Instance> instances_;
  MetadataSchema schema_;
};

/// Canonical JSON-lines form: a header record, a schema record, one
/// "annotator" record per annotator, one "instance" record per instance.
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
/// Throws ParseError (with line number) or InvariantError.
Corpus parse_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

/// Instance x annotator x 3 binary labels with an observation mask.
class AnnotationTensor {
 public:
  AnnotationTensor(std::vector<std::string> instance_ids, std::vector<std::string> annotator_ids);

  std::size_t num_instances() const { return instance_ids_.size(); }
  std::size_t num_annotators() const { return annotator_ids_.size(); }
  const std::vector<std::string>& instance_ids() const { return instance_ids_; }
  const std::vector<std::string>& annotator_ids() const { return annotator_ids_; }

  bool observed(std::size_t i, std::size_t j) const { return mask_[i * num_annotators() + j] != 0; }
  std::uint8_t label(std::size_t i, std::size_t j, std::size_t c) const {
    return labels_[(i * num_annotators() + j) * kNumLabels + c];
  }
  LabelSet label_set(std::size_t i, std::size_t j) const;
  std::size_t observed_count() const;

  /// Marks (i, j) observed with `labels`; `labels` must be non-empty.
  void set(std::size_t i, std::size_t j, LabelSet labels);
  /// Writes a raw label bit without touching the mask; lets tests put
  /// garbage into unobserved cells.
  void poke_label(std::size_t i, std::size_t j, std::size_t c, std::uint8_t bit) {
    labels_[(i * num_annotators() + j) * kNumLabels + c] = bit;
  }

 private:
  std::vector<std::string> instance_ids_;
  std::vector<std::string> annotator_ids_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint8_t> mask_;
};

/// Rows follow corpus order within the split, columns follow corpus annotator order.
AnnotationTensor build_annotation_tensor(const Corpus& corpus, Split split);

using SoftTarget = std::array<double, kNumLabels>;
/// Per-instance mean of observed annotators' binary label vectors.
/// Throws InvariantError for an instance with no observed annotator.
std::vector<SoftTarget> soft_targets(const AnnotationTensor& tensor);

struct SplitStats {
  std::size_t instances = 0;
  std::size_t annotators = 0;
  std::size_t annotations = 0;
  std::size_t explanations = 0;
  double avg_annotations_per_instance = 0.0;
  double avg_explanation_length = 0.0;
  std::array<std::size_t, kNumLabels> label_counts{};
  std::array<double, kNumLabels> label_percent{};
  std::map<std::string, std::size_t> per_annotator;
};

struct StatsReport {
  /// Keys: "train", "dev", "test", "total".
  std::map<std::string, SplitStats> splits;
};

StatsReport corpus_stats(const Corpus& corpus);
nlohmann::json stats_to_json(const StatsReport& report);

/// Converts a LeWiDi-style VariErrNLI release directory (per-split item
/// files plus an annotator metadata file) into a Corpus.
Corpus import_lewidi(const std::filesystem::path& release_dir);

}  // namespace perspex::corpus
