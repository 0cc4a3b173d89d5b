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
#include <random>
#include <string>
#include <vector>

#include "perspex/calibrate.hpp"
#include "perspex/corpus.hpp"
#include "perspex/tc/config.hpp"

namespace perspex::testing {

/// Two instances (one train, one dev) judged by four annotators.
corpus::Corpus tiny_corpus();

/// Random tensor (instances x annotators) with roughly `observed_rate` of
/// the cells observed and non-empty label sets; at least one cell observed
/// per annotator and per instance.
corpus::AnnotationTensor random_tensor(std::size_t instances, std::size_t annotators, double observed_rate,
                                       std::mt19937_64& rng);
std::vector<corpus::LabelSet> random_sets(std::size_t n, std::mt19937_64& rng, bool allow_empty = false);
/// Probabilities on a 0.01 grid so that many cells tie exactly at a threshold.
std::vector<calibrate::ClassProbabilities> random_probs(std::size_t n, std::mt19937_64& rng);

/// Small dimensions for fast model tests; dropout off.
tc::ModelConfig toy_config();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace perspex::testing
