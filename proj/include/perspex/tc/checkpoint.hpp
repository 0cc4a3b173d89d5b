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
#include <string>

#include <json.hpp>

#include "perspex/tc/optim.hpp"

namespace perspex::tc {

/// In-memory image of a checkpoint file.
///
/// On disk: the line "PERSPEX-CKPT 1", an 8-byte little-endian header
/// length, a JSON header (kind, free-form metadata, array directory, optimizer
/// step, parameter checksum), then every array as raw little-endian float64.
struct Checkpoint {
  std::string kind;
  nlohmann::json meta;
  std::map<std::string, Matrix> params;
  std::size_t optimizer_steps = 0;
  std::map<std::string, AdamW::Moments> optimizer_state;
  /// ParamStore::checksum() of the saved parameters.
  std::string param_checksum;
};

/// Snapshot of a live model (and optionally its optimizer).
Checkpoint make_checkpoint(std::string kind, nlohmann::json meta, const ParamStore& store,
                           const AdamW* optimizer = nullptr);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ArtifactError for a missing file, ParseError for a corrupt one.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies saved values into a freshly built store (names and shapes must
/// match one to one) and verifies the content checksum.
void restore_params(ParamStore& store, const Checkpoint& ckpt);

}  // namespace perspex::tc
