// Copyright 2026 The TIDA Authors.
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

namespace tida {

// Base for every error the library raises. The CLI maps subclasses onto exit
// codes (see tools/tida_main.cc).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. `byte_offset` is the position reported by the
// JSON parser, or npos when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset = std::string::npos)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Referential or uniqueness violation inside otherwise well-formed input.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Bad parameters or unusable paths.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caption handed to a perturber has no token the perturber can rewrite.
class NoEligibleToken : public Error {
 public:
  using Error::Error;
};

// Training labels contain a single class, so a probe is undefined.
class DegenerateLabels : public Error {
 public:
  using Error::Error;
};

// Failure reported by an image generation backend.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace tida
