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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perspex/corpus.hpp"

namespace perspex::text {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumReserved = 4;

/// Lowercases, splits on whitespace, and emits every ASCII punctuation
/// character and every digit as its own token.
std::vector<std::string> tokenize(std::string_view text);

/// Joins tokens with single spaces, without a space before closing punctuation.
std::string detokenize(const std::vector<std::string>& tokens);

/// Surface form of an annotator's control token.
std::string control_token(std::string_view annotator_id);

/// Token <-> id bijection. Layout: reserved ids, then one control token per
/// annotator, then content tokens.
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> tokens, std::vector<std::string> annotator_ids, int min_freq);

  std::size_t size() const { return tokens_.size(); }
  int min_freq() const { return min_freq_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& annotator_ids() const { return annotator_ids_; }

  /// Content lookup; UNK for anything else, including reserved surfaces.
  int id_of(std::string_view token) const;
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const;
  /// Throws ArgumentError for an annotator without a control token.
  int control_id(std::string_view annotator_id) const;
  bool is_special(int id) const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);
  /// FNV-1a 64 over the serialized form, as hex.
  std::string checksum() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.annotator_ids_ == b.annotator_ids_ && a.min_freq_ == b.min_freq_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> annotator_ids_;
  std::map<std::string, int, std::less<>> index_;
  int min_freq_ = 1;
};

/// Fixed prompt-scaffolding words that every vocabulary contains.
const std::vector<std::string>& structural_tokens();

/// Builds the vocabulary from train-split contexts, statements and
/// rationales (tokens with count >= min_freq, ordered by count descending,
/// then lexicographically), plus structural tokens and persona words.
/// Throws ArgumentError for min_freq < 1 or an empty train split.
Vocab build_vocab(const corpus::Corpus& corpus, int min_freq);

/// Token ids for `text`, OOV -> UNK. With `add_bos_eos` the result is
/// BOS + content + EOS, content truncated so the total is <= max_len.
std::vector<int> encode(std::string_view text, const Vocab& vocab, std::size_t max_len,
                        bool add_bos_eos);

/// Surface tokens for ids, dropping PAD/BOS/EOS.
std::vector<std::string> decode(const std::vector<int>& ids, const Vocab& vocab);

/// Right-pads with PAD to `length` (no-op when already that long).
std::vector<int> pad_to(std::vector<int> ids, std::size_t length);

}  // namespace perspex::text
