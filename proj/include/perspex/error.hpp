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

#include <stdexcept>
#include <string>

namespace perspex {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag that the CLI echoes in its error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Malformed input: a file that does not parse, with its locus in the message.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

/// Well-formed input that breaks a data invariant.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& message) : Error("invariant_violation", message) {}
};

/// Caller passed arguments outside an operation's contract.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message) : Error("invalid_argument", message) {}
};

/// Two artifacts that must describe the same cells do not.
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& message) : Error("alignment_error", message) {}
};

/// Training produced a NaN or Inf.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message) : Error("divergence", message) {}
};

/// A required artifact (checkpoint, vocab, dump) is missing or incompatible.
class ArtifactError : public Error {
 public:
  explicit ArtifactError(const std::string& message) : Error("artifact_error", message) {}
};

}  // namespace perspex
