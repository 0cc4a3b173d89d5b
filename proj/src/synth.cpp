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

#include "perspex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "perspex/error.hpp"
#include "perspex/tc/config.hpp"

namespace perspex::synth {

using corpus::Label;
using corpus::LabelSet;
using nlohmann::json;

namespace {

const std::vector<std::string> kSubjects{"a farmer",  "two students", "the old teacher", "a young couple",
                                         "some tourists", "the nurse", "a child",         "my neighbor"};
const std::vector<std::string> kVerbs{"waited", "walked", "talked", "laughed", "worked", "sat"};
const std::vector<std::string> kTimes{"in the morning", "after lunch", "at night", "yesterday", "on sunday"};
const std::vector<std::string> kPredicates{"felt tired", "was happy",  "stayed home",
                                           "met a friend", "lost a bag", "bought bread"};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

LabelSet parse_set(const std::string& s) {
  LabelSet out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    const auto l = corpus::parse_label(tok);
    if (!l) throw ArgumentError("bad label in rule: " + s);
    out.insert(*l);
  }
  if (out.empty()) throw ArgumentError("empty label set in rule");
  return out;
}

std::size_t words(const std::string& s) {
  std::istringstream in(s);
  std::string w;
  std::size_t n = 0;
  while (in >> w) ++n;
  return n;
}

Persona persona(std::string id, std::string gender, int age, std::string nat, std::string edu,
                std::string c, std::string e, std::string n) {
  return {{std::move(id), std::move(gender), age, std::move(nat), std::move(edu)},
          {},
          {{"C", std::move(c)}, {"E", std::move(e)}, {"N", std::move(n)}}};
}

}  // namespace

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec s;
  s.cues = {"rain", "market", "doctor", "river", "festival", "exam", "bridge", "garden"};
  s.personas = {
      persona("Ann1", "Female", 22, "Chinese", "MSc", "i think the {cue} part contradicts what the statement claims",
              "i think the {cue} part clearly implies the statement", "i think the {cue} part says nothing certain about it"),
      persona("Ann2", "Male", 33, "German", "Postdoc", "the statement is refuted because the context describes the {cue}",
              "the statement is entailed since the context describes the {cue}",
              "the context mentions the {cue} but gives no evidence either way"),
      persona("Ann3", "Female", 25, "Chinese", "MSc", "no way , the {cue} makes this impossible",
              "yes , the {cue} makes this obvious", "maybe , the {cue} leaves this open"),
      persona("Ann4", "Male", 25, "Chinese", "MSc", "given {cue} the claim must be false", "given {cue} the claim must be true",
              "given {cue} the claim could go either way"),
  };
  return s;
}

void SyntheticSpec::validate() const {
  if (n_instances == 0) throw ArgumentError("synthetic corpus needs at least one instance");
  if (split_ratios.size() != 3) throw ArgumentError("split_ratios needs three entries");
  double sum = 0.0;
  for (double r : split_ratios) {
    if (r < 0.0) throw ArgumentError("negative split ratio");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");
  if (cues.empty()) throw ArgumentError("synthetic spec has no cues");
  if (std::set<std::string>(cues.begin(), cues.end()).size() != cues.size()) {
    throw ArgumentError("duplicate cue keyword");
  }
  if (personas.empty()) throw ArgumentError("synthetic spec has no personas");
  std::set<std::string> ids;
  for (const auto& p : personas) {
    if (!ids.insert(p.profile.id).second) throw ArgumentError("duplicate persona id " + p.profile.id);
    std::set<std::string> seen;
    for (const char* l : {"C", "E", "N"}) {
      auto it = p.templates.find(l);
      if (it == p.templates.end() || it->second.find("{cue}") == std::string::npos) {
        throw ArgumentError("persona " + p.profile.id + " needs a {cue} template for " + l);
      }
      if (!seen.insert(it->second).second) throw ArgumentError("persona " + p.profile.id + " repeats a template");
    }
    for (const auto& [cue, set] : p.rules) {
      if (std::find(cues.begin(), cues.end(), cue) == cues.end()) {
        throw ArgumentError("persona " + p.profile.id + " has a rule for unknown cue " + cue);
      }
      parse_set(set);
    }
    if (!p.rules.empty() && p.rules.size() != cues.size()) {
      throw ArgumentError("persona " + p.profile.id + " rules must cover every cue");
    }
  }
}

SyntheticSpec spec_from_json(const json& j) {
  tc::check_known_keys(j, {"n_instances", "seed", "split_ratios", "cues", "personas"}, "synthetic spec");
  SyntheticSpec s = SyntheticSpec::defaults();
  try {
    if (j.contains("n_instances")) s.n_instances = j.at("n_instances").get<std::size_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("split_ratios")) s.split_ratios = j.at("split_ratios").get<std::vector<double>>();
    if (j.contains("cues")) s.cues = j.at("cues").get<std::vector<std::string>>();
    if (j.contains("personas")) {
      s.personas.clear();
      for (const auto& pj : j.at("personas")) {
        tc::check_known_keys(pj, {"id", "gender", "age", "nationality", "education", "rules", "templates"}, "persona");
        Persona p;
        p.profile = {pj.at("id").get<std::string>(), pj.at("gender").get<std::string>(), pj.at("age").get<int>(),
                     pj.at("nationality").get<std::string>(), pj.at("education").get<std::string>()};
        if (pj.contains("rules")) p.rules = pj.at("rules").get<std::map<std::string, std::string>>();
        p.templates = pj.at("templates").get<std::map<std::string, std::string>>();
        s.personas.push_back(std::move(p));
      }
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

json spec_to_json(const SyntheticSpec& s) {
  json personas = json::array();
  for (const auto& p : s.personas) {
    json pj = {{"id", p.profile.id},
               {"gender", p.profile.gender},
               {"age", p.profile.age},
               {"nationality", p.profile.nationality},
               {"education", p.profile.education},
               {"templates", p.templates}};
    if (!p.rules.empty()) pj["rules"] = p.rules;
    personas.push_back(pj);
  }
  return {{"n_instances", s.n_instances},
          {"seed", s.seed},
          {"split_ratios", s.split_ratios},
          {"cues", s.cues},
          {"personas", personas}};
}

std::string render_rationale(const Persona& p, Label label, const std::string& cue) {
  std::string t = p.templates.at(std::string(1, corpus::label_char(label)));
  const auto pos = t.find("{cue}");
  return t.replace(pos, 5, cue);
}

SyntheticCorpus generate(const SyntheticSpec& input) {
  input.validate();
  SyntheticSpec spec = input;
  std::mt19937_64 rng(spec.seed);

  // Seeded rules: mostly singletons, some two-label sets, and no cue on
  // which every persona agrees (when there is more than one persona).
  const std::vector<std::string> options{"C", "E", "N", "C", "E", "N", "E N", "C N"};
  for (const auto& cue : spec.cues) {
    std::vector<std::string> row(spec.personas.size());
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::set<std::string> distinct;
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] = input.personas[k].rules.empty() ? pick(options, rng) : input.personas[k].rules.at(cue);
        distinct.insert(row[k]);
      }
      if (distinct.size() > 1 || row.size() == 1) break;
    }
    for (std::size_t k = 0; k < row.size(); ++k) spec.personas[k].rules[cue] = row[k];
  }

  const std::size_t n = spec.n_instances;
  const auto n_train = static_cast<std::size_t>(std::llround(spec.split_ratios[0] * static_cast<double>(n)));
  const auto n_dev = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(spec.split_ratios[1] * static_cast<double>(n))));

  struct Tally {
    std::size_t instances = 0, annotations = 0, words = 0;
    std::array<std::size_t, 3> labels{};
    std::map<std::string, std::size_t> per_annotator;
  };
  std::map<std::string, Tally> tally;
  for (const char* name : {"train", "dev", "test", "total"}) {
    for (const auto& p : spec.personas) tally[name].per_annotator[p.profile.id] = 0;
  }

  std::vector<corpus::Instance> instances;
  json key_instances = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    corpus::Instance inst;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%04zu", i + 1);
    inst.id = id;
    inst.split = i < n_train ? corpus::Split::kTrain : i < n_train + n_dev ? corpus::Split::kDev : corpus::Split::kTest;
    const std::string cue = pick(spec.cues, rng);
    inst.context = pick(kSubjects, rng) + " " + pick(kVerbs, rng) + " near the " + cue + " " + pick(kTimes, rng) + " .";
    inst.statement = pick(kSubjects, rng) + " " + pick(kPredicates, rng) + " .";
    json labels = json::object();
    const std::string split(corpus::split_name(inst.split));
    for (auto* t : {&tally[split], &tally["total"]}) ++t->instances;
    for (const auto& p : spec.personas) {
      corpus::AnnotatorJudgment j{inst.id, p.profile.id, {}};
      const LabelSet set = parse_set(p.rules.at(cue));
      for (Label l : corpus::kAllLabels) {
        if (!set.contains(l)) continue;
        j.pairs.push_back({l, render_rationale(p, l, cue)});
        for (auto* t : {&tally[split], &tally["total"]}) {
          ++t->annotations;
          ++t->labels[static_cast<std::size_t>(l)];
          ++t->per_annotator[p.profile.id];
          t->words += words(j.pairs.back().rationale);
        }
      }
      labels[p.profile.id] = set.to_string();
      inst.judgments.push_back(std::move(j));
    }
    std::sort(inst.judgments.begin(), inst.judgments.end(),
              [](const auto& a, const auto& b) { return a.annotator_id < b.annotator_id; });
    key_instances.push_back({{"id", inst.id}, {"split", split}, {"cue", cue}, {"labels", labels}});
    instances.push_back(std::move(inst));
  }

  std::vector<corpus::AnnotatorProfile> profiles;
  for (const auto& p : spec.personas) profiles.push_back(p.profile);
  json expected = json::object();
  for (const auto& [name, t] : tally) {
    expected[name] = {{"instances", t.instances},
                      {"annotations", t.annotations},
                      {"labels", {{"C", t.labels[0]}, {"E", t.labels[1]}, {"N", t.labels[2]}}},
                      {"per_annotator", t.per_annotator},
                      {"rationale_words", t.words}};
  }
  json key = {{"spec", spec_to_json(spec)}, {"instances", key_instances}, {"expected_stats", expected}};
  return {corpus::Corpus(std::move(profiles), std::move(instances)), std::move(key)};
}

double audit_labels(const corpus::Corpus& corpus, const json& key) {
  std::size_t total = 0, match = 0;
  for (const auto& rec : key.at("instances")) {
    const auto* inst = corpus.find_instance(rec.at("id").get<std::string>());
    if (!inst) throw ArgumentError("answer key names a missing instance " + rec.at("id").get<std::string>());
    for (const auto& [ann, set] : rec.at("labels").items()) {
      ++total;
      const auto* j = inst->judgment_for(ann);
      if (j && j->label_set() == parse_set(set.get<std::string>())) ++match;
    }
  }
  if (total == 0) throw ArgumentError("answer key has no judgments");
  return static_cast<double>(match) / static_cast<double>(total);
}

std::vector<std::string> audit_stats(const corpus::Corpus& corpus, const json& key) {
  const auto report = corpus::corpus_stats(corpus);
  std::vector<std::string> problems;
  auto check = [&](const std::string& what, std::size_t got, std::size_t want) {
    if (got != want) problems.push_back(what + ": got " + std::to_string(got) + ", expected " + std::to_string(want));
  };
  for (const auto& [name, exp] : key.at("expected_stats").items()) {
    const auto& s = report.splits.at(name);
    check(name + " instances", s.instances, exp.at("instances").get<std::size_t>());
    check(name + " annotations", s.annotations, exp.at("annotations").get<std::size_t>());
    for (Label l : corpus::kAllLabels) {
      const std::string c(1, corpus::label_char(l));
      check(name + " label " + c, s.label_counts[static_cast<std::size_t>(l)], exp.at("labels").at(c).get<std::size_t>());
    }
    for (const auto& [ann, cnt] : exp.at("per_annotator").items()) {
      auto it = s.per_annotator.find(ann);
      check(name + " " + ann, it == s.per_annotator.end() ? 0 : it->second, cnt.get<std::size_t>());
    }
    const auto ann = exp.at("annotations").get<double>();
    const auto inst = exp.at("instances").get<double>();
    if (ann > 0) {
      const double len = exp.at("rationale_words").get<double>() / ann;
      if (std::abs(len - s.avg_explanation_length) > 1e-9) problems.push_back(name + " explanation length");
    }
    if (inst > 0 && std::abs(ann / inst - s.avg_annotations_per_instance) > 1e-9) {
      problems.push_back(name + " annotations per instance");
    }
  }
  return problems;
}

corpus::Corpus memorization_corpus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("memorization corpus needs instances");
  static const std::vector<std::string> pool{
      "amber",  "basket", "candle", "desert", "engine", "feather", "glacier", "harbor", "island", "jungle",
      "kettle", "ladder", "meadow", "needle", "orchard", "pepper", "quartz",  "ribbon", "saddle", "timber",
      "velvet", "walnut", "yellow", "zephyr", "anchor", "bronze", "cactus",  "dagger", "ember",  "falcon",
      "garnet", "hollow", "ivory",  "jasper", "kernel", "lantern", "marble", "nectar", "oyster", "pebble",
      "quiver", "raven",  "silver", "thistle", "umber", "violet", "willow", "yarrow"};
  std::mt19937_64 rng(seed);
  const auto base = SyntheticSpec::defaults();
  std::vector<corpus::AnnotatorProfile> profiles;
  for (const auto& p : base.personas) profiles.push_back(p.profile);

  auto phrase = [&](std::size_t len) {
    std::string s;
    for (std::size_t k = 0; k < len; ++k) s += (k ? " " : "") + pick(pool, rng);
    return s;
  };
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(corpus::kAllLabels[i % 3]);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<corpus::Instance> instances;
  std::set<std::string> used;
  for (std::size_t i = 0; i < n; ++i) {
    std::string rationale;
    do {
      rationale = phrase(6 + i % 4);
    } while (!used.insert(rationale).second);
    const std::string context = phrase(6), statement = phrase(4);
    const auto& ann = profiles[i % profiles.size()].id;
    for (auto split : {corpus::Split::kTrain, corpus::Split::kDev}) {
      char id[32];
      std::snprintf(id, sizeof id, split == corpus::Split::kTrain ? "mem-%02zu" : "memdev-%02zu", i + 1);
      corpus::Instance inst{id, context, statement, split, {}};
      inst.judgments.push_back({id, ann, {{labels[i], rationale}}});
      instances.push_back(std::move(inst));
    }
  }
  std::stable_sort(instances.begin(), instances.end(),
                   [](const auto& a, const auto& b) { return a.split < b.split; });
  return corpus::Corpus(std::move(profiles), std::move(instances));
}

}  // namespace perspex::synth
