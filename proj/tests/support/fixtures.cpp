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

#include "fixtures.hpp"

namespace perspex::testing {

using corpus::Label;
using corpus::LabelSet;

corpus::Corpus tiny_corpus() {
  std::vector<corpus::AnnotatorProfile> ann{{"Ann1", "Female", 22, "Chinese", "MSc"},
                                            {"Ann2", "Male", 33, "German", "Postdoc"},
                                            {"Ann3", "Female", 25, "Chinese", "MSc"},
                                            {"Ann4", "Male", 25, "Chinese", "MSc"}};
  corpus::Instance a{"i1", "A man plays a guitar on stage.", "A man performs music.", corpus::Split::kTrain, {}};
  a.judgments = {{"i1", "Ann1", {{Label::kE, "Playing guitar on stage is performing."}}},
                 {"i1", "Ann2", {{Label::kE, "Guitar is music."}, {Label::kN, "Maybe he is tuning it."}}},
                 {"i1", "Ann3", {{Label::kE, "He performs."}}},
                 {"i1", "Ann4", {{Label::kN, "Could be a rehearsal."}}}};
  corpus::Instance b{"i2", "Two dogs run in the snow.", "The animals are asleep.", corpus::Split::kDev, {}};
  b.judgments = {{"i2", "Ann1", {{Label::kC, "Running is not sleeping."}}},
                 {"i2", "Ann3", {{Label::kC, "They cannot sleep and run."}}}};
  return corpus::Corpus(std::move(ann), {a, b});
}

std::vector<LabelSet> random_sets(std::size_t n, std::mt19937_64& rng, bool allow_empty) {
  std::uniform_int_distribution<int> bits(allow_empty ? 0 : 1, 7);
  std::vector<LabelSet> out(n);
  for (auto& s : out) s = LabelSet::from_bits(static_cast<std::uint8_t>(bits(rng)));
  return out;
}

corpus::AnnotationTensor random_tensor(std::size_t instances, std::size_t annotators, double observed_rate,
                                       std::mt19937_64& rng) {
  std::vector<std::string> iids, aids;
  for (std::size_t i = 0; i < instances; ++i) iids.push_back("i" + std::to_string(i));
  for (std::size_t j = 0; j < annotators; ++j) aids.push_back("a" + std::to_string(j));
  corpus::AnnotationTensor t(iids, aids);
  std::bernoulli_distribution obs(observed_rate);
  std::uniform_int_distribution<int> bits(1, 7);
  for (std::size_t i = 0; i < instances; ++i) {
    for (std::size_t j = 0; j < annotators; ++j) {
      if (obs(rng) || i == j % instances || j == i % annotators) {
        t.set(i, j, LabelSet::from_bits(static_cast<std::uint8_t>(bits(rng))));
      }
    }
  }
  return t;
}

std::vector<calibrate::ClassProbabilities> random_probs(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pct(0, 100);
  std::vector<calibrate::ClassProbabilities> out(n);
  for (auto& p : out) {
    for (auto& v : p) v = pct(rng) / 100.0;
  }
  return out;
}

tc::ModelConfig toy_config() {
  tc::ModelConfig c;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.ffn_dim = 16;
  c.dropout = 0.0;
  c.max_len_classifier = 64;
  c.max_len_explainer_in = 96;
  c.max_len_explainer_out = 32;
  c.annotator_embed_dim = 4;
  c.metadata_dim = 3;
  c.head_hidden = 6;
  c.prefix_len = 2;
  c.bridge_hidden = 5;
  c.seed = 5;
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("perspex_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace perspex::testing
