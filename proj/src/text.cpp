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

#include "perspex/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "perspex/error.hpp"

namespace perspex::text {

namespace {

const char* const kReserved[kNumReserved] = {"<pad>", "<s>", "</s>", "<unk>"};

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

std::string persona_words(const corpus::AnnotatorProfile& a) {
  return a.gender + " " + a.nationality + " " + a.education + " " + std::to_string(a.age);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (is_ascii_punct(c) || is_ascii_digit(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  static const std::string kNoSpaceBefore = ".,;:!?)]}'%";
  std::string out;
  for (const auto& t : tokens) {
    const bool attach = t.size() == 1 && kNoSpaceBefore.find(t[0]) != std::string::npos;
    if (!out.empty() && !attach) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string control_token(std::string_view annotator_id) {
  return "[ANN:" + std::string(annotator_id) + "]";
}

Vocab::Vocab(std::vector<std::string> tokens, std::vector<std::string> annotator_ids, int min_freq)
    : tokens_(std::move(tokens)), annotator_ids_(std::move(annotator_ids)), min_freq_(min_freq) {
  if (tokens_.size() < kNumReserved + annotator_ids_.size()) throw ParseError("vocab too small");
  for (int i = 0; i < kNumReserved; ++i) {
    if (tokens_[static_cast<std::size_t>(i)] != kReserved[i]) throw ParseError("vocab reserved ids out of place");
  }
  for (std::size_t k = 0; k < annotator_ids_.size(); ++k) {
    if (tokens_[kNumReserved + k] != control_token(annotator_ids_[k])) {
      throw ParseError("vocab control token out of place for " + annotator_ids_[k]);
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ParseError("duplicate vocab token '" + tokens_[i] + "'");
    }
  }
}

std::optional<int> Vocab::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id_of(std::string_view token) const {
  auto id = find(token);
  if (!id || is_special(*id)) return kUnk;
  return *id;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw ArgumentError("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::control_id(std::string_view annotator_id) const {
  for (std::size_t k = 0; k < annotator_ids_.size(); ++k) {
    if (annotator_ids_[k] == annotator_id) return static_cast<int>(kNumReserved + k);
  }
  throw ArgumentError("no control token for annotator " + std::string(annotator_id));
}

bool Vocab::is_special(int id) const {
  return id >= 0 && static_cast<std::size_t>(id) < kNumReserved + annotator_ids_.size();
}

nlohmann::json Vocab::to_json() const {
  return {{"version", 1}, {"min_freq", min_freq_}, {"annotators", annotator_ids_}, {"tokens", tokens_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported vocab version");
    return Vocab(j.at("tokens").get<std::vector<std::string>>(),
                 j.at("annotators").get<std::vector<std::string>>(), j.at("min_freq").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed vocab: ") + e.what());
  }
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArtifactError("cannot write vocab " + path.string());
  f << to_json().dump(1) << "\n";
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArtifactError("missing vocab " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return from_json(nlohmann::json::parse(ss.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string Vocab::checksum() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<std::string>& structural_tokens() {
  static const std::vector<std::string> kTokens = [] {
    std::vector<std::string> t{"persona", "age", "context", "statement", "labels", "probs",
                               "c",       "e",   "n",       ":",         ",",      "|",
                               "=",       "."};
    for (char d = '0'; d <= '9'; ++d) t.emplace_back(1, d);
    return t;
  }();
  return kTokens;
}

Vocab build_vocab(const corpus::Corpus& corpus, int min_freq) {
  if (min_freq < 1) throw ArgumentError("min_freq must be >= 1");
  const auto train = corpus.instances_in(corpus::Split::kTrain);
  if (train.empty()) throw ArgumentError("cannot build a vocabulary from an empty train split");

  std::map<std::string, std::size_t> counts;
  auto count = [&](std::string_view s) {
    for (auto& t : tokenize(s)) ++counts[t];
  };
  for (const auto* inst : train) {
    count(inst->context);
    count(inst->statement);
    for (const auto& j : inst->judgments)
      for (const auto& p : j.pairs) count(p.rationale);
  }
  std::vector<std::pair<std::string, std::size_t>> content;
  for (const auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_freq)) content.emplace_back(tok, n);
  }
  std::stable_sort(content.begin(), content.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens(kReserved, kReserved + kNumReserved);
  std::vector<std::string> annotators;
  for (const auto& a : corpus.annotators()) {
    annotators.push_back(a.id);
    tokens.push_back(control_token(a.id));
  }
  std::set<std::string> present;
  for (const auto& [tok, n] : content) {
    tokens.push_back(tok);
    present.insert(tok);
  }
  std::set<std::string> extra(structural_tokens().begin(), structural_tokens().end());
  for (const auto& a : corpus.annotators())
    for (auto& t : tokenize(persona_words(a))) extra.insert(t);
  for (const auto& t : extra) {
    if (!present.count(t)) tokens.push_back(t);
  }
  return Vocab(std::move(tokens), std::move(annotators), min_freq);
}

std::vector<int> encode(std::string_view text, const Vocab& vocab, std::size_t max_len,
                        bool add_bos_eos) {
  if (add_bos_eos && max_len < 2) throw ArgumentError("max_len must be >= 2 when adding BOS/EOS");
  const auto toks = tokenize(text);
  std::vector<int> ids;
  const std::size_t budget = add_bos_eos ? max_len - 2 : max_len;
  ids.reserve(std::min(toks.size(), budget) + 2);
  if (add_bos_eos) ids.push_back(kBos);
  for (std::size_t i = 0; i < toks.size() && i < budget; ++i) ids.push_back(vocab.id_of(toks[i]));
  if (add_bos_eos) ids.push_back(kEos);
  return ids;
}

std::vector<std::string> decode(const std::vector<int>& ids, const Vocab& vocab) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

std::vector<int> pad_to(std::vector<int> ids, std::size_t length) {
  if (ids.size() < length) ids.resize(length, kPad);
  return ids;
}

}  // namespace perspex::text
