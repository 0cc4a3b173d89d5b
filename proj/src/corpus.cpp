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

#include "perspex/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "perspex/error.hpp"

namespace perspex::corpus {

using nlohmann::json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw ArgumentError("unknown split '" + std::string(name) + "'");
}

char label_char(Label l) {
  switch (l) {
    case Label::kC: return 'C';
    case Label::kE: return 'E';
    case Label::kN: return 'N';
  }
  return '?';
}

std::optional<Label> parse_label(std::string_view text) {
  std::string t;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (t == "c" || t == "contradiction") return Label::kC;
  if (t == "e" || t == "entailment") return Label::kE;
  if (t == "n" || t == "neutral") return Label::kN;
  return std::nullopt;
}

std::string LabelSet::to_string() const {
  std::string out;
  for (Label l : kAllLabels) {
    if (!contains(l)) continue;
    if (!out.empty()) out.push_back(' ');
    out.push_back(label_char(l));
  }
  return out;
}

LabelSet AnnotatorJudgment::label_set() const {
  LabelSet s;
  for (const auto& p : pairs) s.insert(p.label);
  return s;
}

const AnnotatorJudgment* Instance::judgment_for(std::string_view annotator_id) const {
  for (const auto& j : judgments) {
    if (j.annotator_id == annotator_id) return &j;
  }
  return nullptr;
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool in(const std::vector<std::string>& vocab, const std::string& v) {
  return std::find(vocab.begin(), vocab.end(), v) != vocab.end();
}

}  // namespace

Corpus::Corpus(std::vector<AnnotatorProfile> annotators, std::vector<Instance> instances,
               MetadataSchema schema)
    : annotators_(std::move(annotators)), instances_(std::move(instances)), schema_(std::move(schema)) {
  if (schema_.genders.empty() && schema_.nationalities.empty() && schema_.educations.empty()) {
    for (const auto& a : annotators_) {
      schema_.genders.push_back(a.gender);
      schema_.nationalities.push_back(a.nationality);
      schema_.educations.push_back(a.education);
    }
    schema_.genders = sorted_unique(std::move(schema_.genders));
    schema_.nationalities = sorted_unique(std::move(schema_.nationalities));
    schema_.educations = sorted_unique(std::move(schema_.educations));
  }

  std::set<std::string> annotator_ids;
  for (const auto& a : annotators_) {
    if (a.id.empty()) throw InvariantError("annotator with empty id");
    if (!annotator_ids.insert(a.id).second) throw InvariantError("duplicate annotator id " + a.id);
    if (a.age <= 0) throw InvariantError("non-positive age for annotator " + a.id);
    if (!in(schema_.genders, a.gender) || !in(schema_.nationalities, a.nationality) ||
        !in(schema_.educations, a.education)) {
      throw InvariantError("undeclared metadata category for annotator " + a.id);
    }
  }

  std::set<std::string> instance_ids;
  for (auto& inst : instances_) {
    if (inst.id.empty()) throw InvariantError("instance with empty id");
    if (!instance_ids.insert(inst.id).second) throw InvariantError("duplicate instance id " + inst.id);
    if (blank(inst.context)) throw InvariantError("empty context at " + inst.id);
    if (blank(inst.statement)) throw InvariantError("empty statement at " + inst.id);
    std::sort(inst.judgments.begin(), inst.judgments.end(),
              [](const AnnotatorJudgment& a, const AnnotatorJudgment& b) {
                return a.annotator_id < b.annotator_id;
              });
    for (std::size_t k = 0; k < inst.judgments.size(); ++k) {
      const auto& j = inst.judgments[k];
      if (j.instance_id != inst.id) throw InvariantError("judgment instance id mismatch at " + inst.id);
      if (!annotator_ids.count(j.annotator_id)) {
        throw InvariantError("unknown annotator " + j.annotator_id + " at " + inst.id);
      }
      if (k > 0 && inst.judgments[k - 1].annotator_id == j.annotator_id) {
        throw InvariantError("duplicate judgment by " + j.annotator_id + " at " + inst.id);
      }
      if (j.pairs.empty()) throw InvariantError("empty judgment by " + j.annotator_id + " at " + inst.id);
      LabelSet seen;
      for (const auto& p : j.pairs) {
        if (seen.contains(p.label)) {
          throw InvariantError("repeated label by " + j.annotator_id + " at " + inst.id);
        }
        seen.insert(p.label);
        if (blank(p.rationale)) throw InvariantError("empty rationale at " + inst.id);
      }
    }
  }
}

std::optional<std::size_t> Corpus::annotator_index(std::string_view id) const {
  for (std::size_t i = 0; i < annotators_.size(); ++i) {
    if (annotators_[i].id == id) return i;
  }
  return std::nullopt;
}

const AnnotatorProfile& Corpus::annotator(std::string_view id) const {
  auto idx = annotator_index(id);
  if (!idx) throw ArgumentError("unknown annotator " + std::string(id));
  return annotators_[*idx];
}

const Instance* Corpus::find_instance(std::string_view id) const {
  for (const auto& inst : instances_) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::vector<const Instance*> Corpus::instances_in(Split split) const {
  std::vector<const Instance*> out;
  for (const auto& inst : instances_) {
    if (inst.split == split) out.push_back(&inst);
  }
  return out;
}

std::size_t Corpus::judgment_count() const {
  std::size_t n = 0;
  for (const auto& inst : instances_) n += inst.judgments.size();
  return n;
}

std::size_t Corpus::pair_count() const {
  std::size_t n = 0;
  for (const auto& inst : instances_)
    for (const auto& j : inst.judgments) n += j.pairs.size();
  return n;
}

// --------------------------------------------------------------- file I/O

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  out += json{{"kind", "header"}, {"format", "perspex-corpus"}, {"version", 1}}.dump() + "\n";
  const auto& s = corpus.schema();
  out += json{{"kind", "schema"},
              {"gender", s.genders},
              {"nationality", s.nationalities},
              {"education", s.educations}}
             .dump() +
         "\n";
  for (const auto& a : corpus.annotators()) {
    out += json{{"kind", "annotator"},
                {"id", a.id},
                {"gender", a.gender},
                {"age", a.age},
                {"nationality", a.nationality},
                {"education", a.education}}
               .dump() +
           "\n";
  }
  for (const auto& inst : corpus.instances()) {
    json judgments = json::object();
    for (const auto& j : inst.judgments) {
      json pairs = json::array();
      for (const auto& p : j.pairs) {
        pairs.push_back({{"label", std::string(1, label_char(p.label))}, {"rationale", p.rationale}});
      }
      judgments[j.annotator_id] = std::move(pairs);
    }
    out += json{{"kind", "instance"},
                {"id", inst.id},
                {"split", std::string(split_name(inst.split))},
                {"context", inst.context},
                {"statement", inst.statement},
                {"judgments", std::move(judgments)}}
               .dump() +
           "\n";
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArtifactError("cannot write corpus " + path.string());
  f << serialize_corpus(corpus);
}

namespace {

void require_keys(const json& rec, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
  for (const char* k : required) {
    if (!rec.contains(k)) throw ParseError(where + ": missing field '" + k + "'");
  }
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    auto match = [&](const char* k) { return it.key() == k; };
    if (std::none_of(required.begin(), required.end(), match) &&
        std::none_of(optional.begin(), optional.end(), match)) {
      throw ParseError(where + ": unknown field '" + it.key() + "'");
    }
  }
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source) {
  std::vector<AnnotatorProfile> annotators;
  std::vector<Instance> instances;
  MetadataSchema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      if (!rec.is_object() || !rec.contains("kind")) throw ParseError(where + ": record without 'kind'");
      const auto kind = rec.at("kind").get<std::string>();
      if (kind == "header") {
        if (rec.value("format", "") != "perspex-corpus" || rec.value("version", 0) != 1) {
          throw ParseError(where + ": unsupported corpus format/version");
        }
      } else if (kind == "schema") {
        require_keys(rec, {"kind", "gender", "nationality", "education"}, {}, where);
        schema.genders = rec.at("gender").get<std::vector<std::string>>();
        schema.nationalities = rec.at("nationality").get<std::vector<std::string>>();
        schema.educations = rec.at("education").get<std::vector<std::string>>();
      } else if (kind == "annotator") {
        require_keys(rec, {"kind", "id", "gender", "age", "nationality", "education"}, {}, where);
        annotators.push_back({rec.at("id").get<std::string>(), rec.at("gender").get<std::string>(),
                              rec.at("age").get<int>(), rec.at("nationality").get<std::string>(),
                              rec.at("education").get<std::string>()});
      } else if (kind == "instance") {
        require_keys(rec, {"kind", "id", "split", "context", "statement", "judgments"}, {"round2"},
                     where);
        Instance inst;
        inst.id = rec.at("id").get<std::string>();
        inst.split = parse_split(rec.at("split").get<std::string>());
        inst.context = rec.at("context").get<std::string>();
        inst.statement = rec.at("statement").get<std::string>();
        for (auto it = rec.at("judgments").begin(); it != rec.at("judgments").end(); ++it) {
          AnnotatorJudgment j{inst.id, it.key(), {}};
          for (const auto& p : it.value()) {
            require_keys(p, {"label", "rationale"}, {"validity"}, where);
            const auto label_text = p.at("label").get<std::string>();
            const auto label = parse_label(label_text);
            if (!label) throw ParseError(where + ": unknown label '" + label_text + "'");
            j.pairs.push_back({*label, p.at("rationale").get<std::string>()});
          }
          inst.judgments.push_back(std::move(j));
        }
        instances.push_back(std::move(inst));
      } else {
        throw ParseError(where + ": unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ArgumentError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return Corpus(std::move(annotators), std::move(instances), std::move(schema));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArtifactError("cannot open corpus " + path.string());
  return parse_corpus(f, path.string());
}

// ----------------------------------------------------------------- tensor

AnnotationTensor::AnnotationTensor(std::vector<std::string> instance_ids,
                                   std::vector<std::string> annotator_ids)
    : instance_ids_(std::move(instance_ids)),
      annotator_ids_(std::move(annotator_ids)),
      labels_(instance_ids_.size() * annotator_ids_.size() * kNumLabels, 0),
      mask_(instance_ids_.size() * annotator_ids_.size(), 0) {}

LabelSet AnnotationTensor::label_set(std::size_t i, std::size_t j) const {
  LabelSet s;
  for (Label l : kAllLabels) {
    if (label(i, j, static_cast<std::size_t>(l))) s.insert(l);
  }
  return s;
}

std::size_t AnnotationTensor::observed_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

void AnnotationTensor::set(std::size_t i, std::size_t j, LabelSet labels) {
  if (labels.empty()) throw InvariantError("observed annotation with no label");
  mask_[i * num_annotators() + j] = 1;
  for (Label l : kAllLabels) {
    labels_[(i * num_annotators() + j) * kNumLabels + static_cast<std::size_t>(l)] =
        labels.contains(l) ? 1 : 0;
  }
}

AnnotationTensor build_annotation_tensor(const Corpus& corpus, Split split) {
  std::vector<std::string> ids;
  for (const Instance* inst : corpus.instances_in(split)) ids.push_back(inst->id);
  std::vector<std::string> annotators;
  for (const auto& a : corpus.annotators()) annotators.push_back(a.id);
  AnnotationTensor t(std::move(ids), std::move(annotators));
  std::size_t i = 0;
  for (const Instance* inst : corpus.instances_in(split)) {
    for (const auto& j : inst->judgments) t.set(i, *corpus.annotator_index(j.annotator_id), j.label_set());
    ++i;
  }
  return t;
}

std::vector<SoftTarget> soft_targets(const AnnotationTensor& tensor) {
  std::vector<SoftTarget> out(tensor.num_instances());
  for (std::size_t i = 0; i < tensor.num_instances(); ++i) {
    std::size_t observed = 0;
    SoftTarget sum{};
    for (std::size_t j = 0; j < tensor.num_annotators(); ++j) {
      if (!tensor.observed(i, j)) continue;
      ++observed;
      for (std::size_t c = 0; c < kNumLabels; ++c) sum[c] += tensor.label(i, j, c);
    }
    if (observed == 0) throw InvariantError("no observed annotator at " + tensor.instance_ids()[i]);
    for (std::size_t c = 0; c < kNumLabels; ++c) out[i][c] = sum[c] / static_cast<double>(observed);
  }
  return out;
}

// ------------------------------------------------------------------ stats

namespace {

std::size_t whitespace_words(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : s) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

void finish(SplitStats& s, std::size_t words) {
  s.explanations = s.annotations;
  s.avg_annotations_per_instance =
      s.instances ? static_cast<double>(s.annotations) / static_cast<double>(s.instances) : 0.0;
  s.avg_explanation_length =
      s.annotations ? static_cast<double>(words) / static_cast<double>(s.annotations) : 0.0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    s.label_percent[c] =
        s.annotations ? 100.0 * static_cast<double>(s.label_counts[c]) / static_cast<double>(s.annotations)
                      : 0.0;
  }
  s.annotators = 0;
  for (const auto& [id, n] : s.per_annotator) s.annotators += n > 0 ? 1 : 0;
}

}  // namespace

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport report;
  SplitStats total;
  std::size_t total_words = 0;
  for (const auto& a : corpus.annotators()) total.per_annotator[a.id] = 0;
  for (Split split : kAllSplits) {
    SplitStats s;
    for (const auto& a : corpus.annotators()) s.per_annotator[a.id] = 0;
    std::size_t words = 0;
    for (const Instance* inst : corpus.instances_in(split)) {
      ++s.instances;
      for (const auto& j : inst->judgments) {
        for (const auto& p : j.pairs) {
          ++s.annotations;
          ++s.label_counts[static_cast<std::size_t>(p.label)];
          ++s.per_annotator[j.annotator_id];
          words += whitespace_words(p.rationale);
        }
      }
    }
    total.instances += s.instances;
    total.annotations += s.annotations;
    for (std::size_t c = 0; c < kNumLabels; ++c) total.label_counts[c] += s.label_counts[c];
    for (const auto& [id, n] : s.per_annotator) total.per_annotator[id] += n;
    total_words += words;
    finish(s, words);
    report.splits.emplace(std::string(split_name(split)), std::move(s));
  }
  finish(total, total_words);
  report.splits.emplace("total", std::move(total));
  return report;
}

json stats_to_json(const StatsReport& report) {
  json out = json::object();
  for (const auto& [name, s] : report.splits) {
    json labels = json::object();
    for (Label l : kAllLabels) {
      const auto c = static_cast<std::size_t>(l);
      labels[std::string(1, label_char(l))] = {{"count", s.label_counts[c]}, {"percent", s.label_percent[c]}};
    }
    out[name] = {{"instances", s.instances},
                 {"annotators", s.annotators},
                 {"annotations", s.annotations},
                 {"explanations", s.explanations},
                 {"avg_annotations_per_instance", s.avg_annotations_per_instance},
                 {"avg_explanation_length", s.avg_explanation_length},
                 {"labels", labels},
                 {"per_annotator", s.per_annotator}};
  }
  return out;
}

// ----------------------------------------------------------------- import

namespace {

using ojson = nlohmann::ordered_json;

ojson read_json_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ArtifactError("cannot open release file " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return ojson::parse(ss.str());
  } catch (const ojson::parse_error& e) {
    // byte offset is the only locus the whole-file format offers; translate to a record index
    const std::string text = ss.str();
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t records = 0;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < upto; ++i) {
      const char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
      } else if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        if (++depth == 2) ++records;
      } else if (c == '}') {
        --depth;
      }
    }
    throw ParseError(p.string() + ": parse error in record " + std::to_string(records) + " (byte " +
                     std::to_string(e.byte) + "): " + e.what());
  }
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const ojson* find_ci(const ojson& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (lower(it.key()) == lower(std::string(key))) return &it.value();
  }
  return nullptr;
}

std::string scalar_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return std::to_string(v.get<double>());
  throw ParseError("expected a string or number, got " + v.dump());
}

std::vector<std::string> split_labels(const ojson& v) {
  std::vector<std::string> out;
  auto push_csv = [&](const std::string& s) {
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        if (!blank(cur)) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!blank(cur)) out.push_back(cur);
  };
  if (v.is_string()) {
    push_csv(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) push_csv(scalar_text(e));
  } else {
    throw ParseError("unsupported label value " + v.dump());
  }
  return out;
}

std::vector<std::string> explanation_list(const ojson& v) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) out.push_back(scalar_text(e));
  } else {
    throw ParseError("unsupported explanation value " + v.dump());
  }
  return out;
}

std::optional<Split> split_from_filename(const std::string& name) {
  const std::string n = lower(name);
  if (n.find("train") != std::string::npos) return Split::kTrain;
  if (n.find("dev") != std::string::npos || n.find("val") != std::string::npos) return Split::kDev;
  if (n.find("test") != std::string::npos) return Split::kTest;
  return std::nullopt;
}

}  // namespace

Corpus import_lewidi(const std::filesystem::path& release_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(release_dir)) throw ArtifactError("release directory not found: " + release_dir.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(release_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::optional<fs::path> meta_file;
  std::vector<std::pair<Split, fs::path>> split_files;
  for (const auto& f : files) {
    const std::string n = lower(f.filename().string());
    if (n.find("meta") != std::string::npos || n.find("annotator") != std::string::npos) {
      meta_file = f;
    } else if (auto s = split_from_filename(n)) {
      split_files.emplace_back(*s, f);
    }
  }
  if (!meta_file) {
    throw ArtifactError("release has no annotator metadata file (expected *meta*.json in " +
                        release_dir.string() + ")");
  }
  if (split_files.empty()) {
    throw ArtifactError("release has no split files (expected *train*.json, *dev*.json, *test*.json in " +
                        release_dir.string() + ")");
  }
  std::stable_sort(split_files.begin(), split_files.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<AnnotatorProfile> annotators;
  const ojson meta = read_json_file(*meta_file);
  if (!meta.is_object()) throw ParseError(meta_file->string() + ": expected an object keyed by annotator id");
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    const auto& m = it.value();
    const ojson* gender = find_ci(m, "gender");
    const ojson* age = find_ci(m, "age");
    const ojson* nat = find_ci(m, "nationality");
    const ojson* edu = find_ci(m, "education");
    if (!gender || !age || !nat || !edu) {
      throw ParseError(meta_file->string() + ": annotator " + it.key() +
                       " needs Gender, Age, Nationality and Education fields");
    }
    int age_years = 0;
    try {
      age_years = std::stoi(scalar_text(*age));
    } catch (const std::exception&) {
      throw ParseError(meta_file->string() + ": non-numeric age for annotator " + it.key());
    }
    annotators.push_back({it.key(), scalar_text(*gender), age_years, scalar_text(*nat), scalar_text(*edu)});
  }

  std::vector<Instance> instances;
  for (const auto& [split, path] : split_files) {
    const ojson items = read_json_file(path);
    if (!items.is_object()) throw ParseError(path.string() + ": expected an object keyed by item id");
    std::size_t record = 0;
    for (auto it = items.begin(); it != items.end(); ++it, ++record) {
      const std::string where = path.string() + " record " + std::to_string(record) + " (" + it.key() + ")";
      const auto& item = it.value();
      const ojson* text = find_ci(item, "text");
      const ojson* context = text ? find_ci(*text, "context") : nullptr;
      const ojson* statement = text ? find_ci(*text, "statement") : nullptr;
      const ojson* annotations = find_ci(item, "annotations");
      const ojson* explanations = find_ci(item, "explanations");
      if (!explanations) {
        if (const ojson* other = find_ci(item, "other_info")) explanations = find_ci(*other, "explanations");
      }
      if (!context || !statement || !annotations || !explanations) {
        throw ParseError(where + ": expected text.context, text.statement, annotations and explanations");
      }
      Instance inst;
      inst.id = it.key();
      inst.split = split;
      inst.context = scalar_text(*context);
      inst.statement = scalar_text(*statement);
      for (auto a = annotations->begin(); a != annotations->end(); ++a) {
        const auto labels = split_labels(a.value());
        const ojson* expl = find_ci(*explanations, a.key());
        if (!expl) throw ParseError(where + ": no explanations for annotator " + a.key());
        const auto texts = explanation_list(*expl);
        if (texts.size() != labels.size()) {
          throw ParseError(where + ": annotator " + a.key() + " has " + std::to_string(labels.size()) +
                           " labels but " + std::to_string(texts.size()) + " explanations");
        }
        AnnotatorJudgment j{inst.id, a.key(), {}};
        for (std::size_t k = 0; k < labels.size(); ++k) {
          const auto l = parse_label(labels[k]);
          if (!l) throw ParseError(where + ": unknown label '" + labels[k] + "'");
          j.pairs.push_back({*l, texts[k]});
        }
        inst.judgments.push_back(std::move(j));
      }
      instances.push_back(std::move(inst));
    }
  }
  return Corpus(std::move(annotators), std::move(instances));
}

}  // namespace perspex::corpus
