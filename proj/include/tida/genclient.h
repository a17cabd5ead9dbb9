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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tida {

struct GenerationRequest {
  std::string prompt;
  double guidance_scale = 8.0;
  int width = 128;
  int height = 128;
  std::optional<uint64_t> seed;
  std::string request_id;

  // Throws ConfigError when a field is out of range.
  void Validate() const;
};

struct GenerationResult {
  std::string request_id;
  std::filesystem::path image_path;
  std::string backend;
  int64_t latency_ms = 0;
};

// A text-to-image service. Render returns encoded PNG bytes or throws
// GenerationError. Implementations must be safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual std::string Render(const GenerationRequest& request) = 0;
};

// Deterministic local backend: the image is a pure function of the prompt,
// seed and size. Counts every Render call.
class StubBackend : public Backend {
 public:
  std::string name() const override { return "stub"; }
  std::string Render(const GenerationRequest& request) override;

  std::size_t call_count() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

// HTTP backend. POSTs {"prompt", "guidance_scale", "width", "height", "seed"}
// to <endpoint>/generate and expects image/png bytes back. A bearer token,
// when set, goes into the Authorization header.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string endpoint, std::string token = {},
                std::chrono::milliseconds timeout = std::chrono::seconds(120));

  std::string name() const override { return "remote"; }
  std::string Render(const GenerationRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string token_;
  std::chrono::milliseconds timeout_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

struct GenerateOptions {
  std::filesystem::path image_dir = "images";
  RetryPolicy retry;
};

// Hex digest identifying the image a request would produce on `backend_name`:
// covers prompt, seed, backend, guidance scale and size.
std::string ContentKey(const GenerationRequest& request, const std::string& backend_name);

// Relative location of a content key under the image directory.
std::filesystem::path ContentPath(const std::string& key);

// Renders through `backend`, retrying retryable failures with exponential
// backoff, then persists the bytes at image_dir/ContentPath(key).
GenerationResult Generate(const GenerationRequest& request, Backend& backend,
                          const GenerateOptions& options = {});

struct BatchItem {
  std::optional<GenerationResult> result;
  std::string error;  // set when result is empty
  bool from_journal = false;
};

struct BatchReport {
  std::vector<BatchItem> items;  // request order
  std::size_t generated = 0;
  std::size_t from_journal = 0;
  std::size_t failed = 0;

  bool complete() const { return failed == 0; }
};

struct BatchOptions {
  GenerateOptions generate;
  // JSONL of {"request_id", "status", "image_path"}. Empty disables it.
  std::filesystem::path journal;
};

// Runs every request with at most `max_in_flight` outstanding. Requests whose
// request_id is journaled as "ok" with the image still on disk are not sent
// again. Individual failures are recorded, never thrown.
BatchReport GenerateBatch(const std::vector<GenerationRequest>& requests, Backend& backend,
                          std::size_t max_in_flight, const BatchOptions& options = {});

// Builds a backend from CLI-style settings ("stub" or "remote").
std::unique_ptr<Backend> MakeBackend(const std::string& kind, const std::string& endpoint,
                                     const std::string& token,
                                     std::chrono::milliseconds timeout);

}  // namespace tida
