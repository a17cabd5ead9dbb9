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

#include "tida/genclient.h"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tida/error.h"
#include "tida/png.h"
#include "tida/random.h"
#include "tida/sha256.h"

namespace tida {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void WriteFileAtomically(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw GenerationError("cannot write image '" + tmp.string() + "'", false);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw GenerationError("short write to '" + tmp.string() + "'", false);
  }
  std::filesystem::rename(tmp, path);
}

struct JournalEntry {
  std::string status;
  std::filesystem::path image_path;
};

std::unordered_map<std::string, JournalEntry> ReadJournal(const std::filesystem::path& path) {
  std::unordered_map<std::string, JournalEntry> entries;
  std::ifstream in(path, std::ios::binary);
  if (!in) return entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // A torn final line from an interrupted run is ignored.
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) continue;
    if (!rec.contains("request_id") || !rec.contains("status")) continue;
    JournalEntry entry;
    entry.status = rec.at("status").get<std::string>();
    if (rec.contains("image_path") && rec.at("image_path").is_string()) {
      entry.image_path = rec.at("image_path").get<std::string>();
    }
    entries[rec.at("request_id").get<std::string>()] = std::move(entry);
  }
  return entries;
}

class JournalWriter {
 public:
  explicit JournalWriter(const std::filesystem::path& path) {
    if (path.empty()) return;
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    // Start on a fresh line if an earlier run died mid-record.
    bool needs_newline = false;
    {
      std::ifstream in(path, std::ios::binary | std::ios::ate);
      if (in && in.tellg() > 0) {
        in.seekg(-1, std::ios::end);
        needs_newline = in.get() != '\n';
      }
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw ConfigError("cannot open journal '" + path.string() + "' for writing");
    if (needs_newline) out_ << '\n';
    enabled_ = true;
  }

  void Record(const std::string& request_id, bool ok, const std::filesystem::path& image_path,
              const std::string& error) {
    if (!enabled_) return;
    json rec;
    rec["request_id"] = request_id;
    rec["status"] = ok ? "ok" : "failed";
    rec["image_path"] = ok ? json(image_path.string()) : json(nullptr);
    if (!ok) rec["error"] = error;
    std::lock_guard lock(mu_);
    out_ << rec.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  bool enabled_ = false;
};

}  // namespace

void GenerationRequest::Validate() const {
  if (prompt.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("generation request '" + request_id + "': empty prompt");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigError("generation request '" + request_id + "': width and height must be > 0");
  }
  if (!(guidance_scale > 0.0) || !std::isfinite(guidance_scale)) {
    throw ConfigError("generation request '" + request_id + "': guidance_scale must be > 0");
  }
}

std::string StubBackend::Render(const GenerationRequest& request) {
  calls_.fetch_add(1);
  const std::string key = ContentKey(request, name());
  Rng rng(Fnv1a64(key));
  const auto w = static_cast<uint32_t>(request.width);
  const auto h = static_cast<uint32_t>(request.height);

  // Two-corner gradient with a few solid rectangles on top.
  std::array<uint8_t, 6> corners{};
  for (auto& c : corners) c = static_cast<uint8_t>(rng.UniformIndex(256));
  std::vector<uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      const double t = (static_cast<double>(x) + y) / (static_cast<double>(w) + h);
      for (int ch = 0; ch < 3; ++ch) {
        rgb[(static_cast<std::size_t>(y) * w + x) * 3 + ch] =
            static_cast<uint8_t>(corners[ch] * (1.0 - t) + corners[3 + ch] * t);
      }
    }
  }
  for (int r = 0; r < 4; ++r) {
    const uint32_t x0 = static_cast<uint32_t>(rng.UniformIndex(w));
    const uint32_t y0 = static_cast<uint32_t>(rng.UniformIndex(h));
    const uint32_t x1 = std::min(w, x0 + 1 + static_cast<uint32_t>(rng.UniformIndex(w / 2 + 1)));
    const uint32_t y1 = std::min(h, y0 + 1 + static_cast<uint32_t>(rng.UniformIndex(h / 2 + 1)));
    std::array<uint8_t, 3> fill{};
    for (auto& c : fill) c = static_cast<uint8_t>(rng.UniformIndex(256));
    for (uint32_t y = y0; y < y1; ++y) {
      for (uint32_t x = x0; x < x1; ++x) {
        std::copy(fill.begin(), fill.end(), rgb.begin() + (static_cast<std::size_t>(y) * w + x) * 3);
      }
    }
  }
  return EncodePngRgb(w, h, rgb);
}

RemoteBackend::RemoteBackend(std::string endpoint, std::string token,
                             std::chrono::milliseconds timeout)
    : token_(std::move(token)), timeout_(timeout) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + endpoint + "' must start with http:// or https://");
  }
  const auto path_begin = endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = endpoint.substr(0, path_begin);
  if (path_begin != std::string::npos) path_prefix_ = endpoint.substr(path_begin);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string RemoteBackend::Render(const GenerationRequest& request) {
  httplib::Client client(scheme_host_port_);
  if (!client.is_valid()) throw ConfigError("invalid endpoint '" + scheme_host_port_ + "'");
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  json body;
  body["prompt"] = request.prompt;
  body["guidance_scale"] = request.guidance_scale;
  body["width"] = request.width;
  body["height"] = request.height;
  body["seed"] = request.seed ? json(*request.seed) : json(nullptr);

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = client.Post(path_prefix_ + "/generate", headers, body.dump(), "application/json");
  if (!res) {
    throw GenerationError("transport failure talking to " + scheme_host_port_ + ": " +
                              httplib::to_string(res.error()),
                          true);
  }
  if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) {
    throw GenerationError("backend rejected request (" + std::to_string(res->status) +
                              "): " + res->body,
                          false);
  }
  if (res->status != 200) {
    throw GenerationError("backend error (" + std::to_string(res->status) + "): " + res->body,
                          true);
  }
  if (!LooksLikePng(res->body)) throw GenerationError("backend returned a non-PNG body", false);
  return std::move(res->body);
}

std::string ContentKey(const GenerationRequest& request, const std::string& backend_name) {
  json key;
  key["prompt"] = request.prompt;
  key["seed"] = request.seed ? json(*request.seed) : json(nullptr);
  key["backend"] = backend_name;
  key["guidance_scale"] = request.guidance_scale;
  key["width"] = request.width;
  key["height"] = request.height;
  return Sha256Hex(key.dump());
}

std::filesystem::path ContentPath(const std::string& key) {
  return std::filesystem::path(key.substr(0, 2)) / (key + ".png");
}

GenerationResult Generate(const GenerationRequest& request, Backend& backend,
                          const GenerateOptions& options) {
  request.Validate();
  const std::string backend_name = backend.name();
  const auto start = Clock::now();
  auto backoff = options.retry.initial_backoff;
  std::string bytes;
  for (int attempt = 1;; ++attempt) {
    try {
      bytes = backend.Render(request);
      break;
    } catch (const GenerationError& e) {
      if (!e.retryable() || attempt >= options.retry.max_attempts) {
        throw GenerationError(e.what() + std::string(" (after ") + std::to_string(attempt) +
                                  (attempt == 1 ? " attempt)" : " attempts)"),
                              e.retryable());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(options.retry.max_backoff,
                       std::chrono::milliseconds(static_cast<int64_t>(
                           static_cast<double>(backoff.count()) * options.retry.multiplier)));
  }

  GenerationResult result;
  result.request_id = request.request_id;
  result.backend = backend_name;
  result.image_path = options.image_dir / ContentPath(ContentKey(request, backend_name));
  WriteFileAtomically(result.image_path, bytes);
  result.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  return result;
}

BatchReport GenerateBatch(const std::vector<GenerationRequest>& requests, Backend& backend,
                          std::size_t max_in_flight, const BatchOptions& options) {
  if (max_in_flight == 0) throw ConfigError("max_in_flight must be >= 1");
  const auto journaled = options.journal.empty()
                             ? std::unordered_map<std::string, JournalEntry>{}
                             : ReadJournal(options.journal);
  JournalWriter journal(options.journal);

  BatchReport report;
  report.items.resize(requests.size());

  // Resolve journal hits and in-batch duplicates up front; only the first
  // occurrence of a request_id is sent.
  std::vector<std::size_t> pending;
  std::map<std::string, std::size_t> first_index;
  std::vector<std::pair<std::size_t, std::size_t>> duplicates;
  const std::string backend_name = backend.name();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (auto it = journaled.find(req.request_id);
        it != journaled.end() && it->second.status == "ok" &&
        std::filesystem::exists(it->second.image_path)) {
      report.items[i].result = GenerationResult{req.request_id, it->second.image_path,
                                                backend_name, 0};
      report.items[i].from_journal = true;
      continue;
    }
    auto [pos, inserted] = first_index.emplace(req.request_id, i);
    if (inserted) {
      pending.push_back(i);
    } else {
      duplicates.emplace_back(i, pos->second);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t slot = next.fetch_add(1); slot < pending.size(); slot = next.fetch_add(1)) {
      const std::size_t i = pending[slot];
      BatchItem& item = report.items[i];
      try {
        item.result = Generate(requests[i], backend, options.generate);
        journal.Record(requests[i].request_id, true, item.result->image_path, {});
      } catch (const Error& e) {
        item.error = e.what();
        journal.Record(requests[i].request_id, false, {}, item.error);
      } catch (const std::exception& e) {
        item.error = e.what();
        journal.Record(requests[i].request_id, false, {}, item.error);
      }
    }
  };
  const std::size_t threads = std::min(max_in_flight, pending.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto [dup, original] : duplicates) {
    report.items[dup] = report.items[original];
    if (report.items[dup].result) report.items[dup].result->request_id = requests[dup].request_id;
  }
  for (const auto& item : report.items) {
    if (!item.result) {
      ++report.failed;
    } else if (item.from_journal) {
      ++report.from_journal;
    }
  }
  for (std::size_t i : pending) {
    if (report.items[i].result) ++report.generated;
  }
  return report;
}

std::unique_ptr<Backend> MakeBackend(const std::string& kind, const std::string& endpoint,
                                     const std::string& token,
                                     std::chrono::milliseconds timeout) {
  if (kind == "stub") return std::make_unique<StubBackend>();
  if (kind == "remote") {
    if (endpoint.empty()) throw ConfigError("--endpoint is required for the remote backend");
    return std::make_unique<RemoteBackend>(endpoint, token, timeout);
  }
  throw ConfigError("unknown backend '" + kind + "'");
}

}  // namespace tida
