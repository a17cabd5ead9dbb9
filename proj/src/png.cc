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

#include "tida/png.h"

#include <zlib.h>

#include <array>
#include <string_view>
#include <vector>

#include "tida/error.h"

namespace tida {
namespace {

constexpr std::array<uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void PutU32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

uint32_t GetU32(std::string_view s, std::size_t at) {
  auto b = [&](std::size_t i) { return static_cast<uint32_t>(static_cast<uint8_t>(s[at + i])); };
  return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

void PutChunk(std::string& out, const char type[4], std::string_view data) {
  PutU32(out, static_cast<uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.append(type, 4);
  out.append(data);
  const auto* crc_begin = reinterpret_cast<const Bytef*>(out.data() + type_at);
  PutU32(out, static_cast<uint32_t>(crc32(0L, crc_begin, static_cast<uInt>(4 + data.size()))));
}

}  // namespace

std::string EncodePngRgb(uint32_t width, uint32_t height, std::span<const uint8_t> rgb) {
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  if (width == 0 || height == 0 || rgb.size() != stride * height) {
    throw ConfigError("EncodePngRgb: pixel buffer does not match dimensions");
  }
  std::vector<uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), rgb.begin() + y * stride, rgb.begin() + (y + 1) * stride);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw Error("zlib compression failed");
  }
  packed.resize(packed_size);

  std::string header;
  PutU32(header, width);
  PutU32(header, height);
  header.push_back(8);  // bit depth
  header.push_back(2);  // colour type: truecolour
  header.push_back(0);  // compression
  header.push_back(0);  // filter
  header.push_back(0);  // interlace

  std::string out(kSignature.begin(), kSignature.end());
  PutChunk(out, "IHDR", header);
  PutChunk(out, "IDAT", packed);
  PutChunk(out, "IEND", {});
  return out;
}

bool LooksLikePng(std::string_view bytes) {
  if (bytes.size() < kSignature.size() ||
      bytes.substr(0, 8) != std::string_view(reinterpret_cast<const char*>(kSignature.data()), 8)) {
    return false;
  }
  std::size_t at = 8;
  bool first = true;
  while (at + 12 <= bytes.size()) {
    const uint32_t length = GetU32(bytes, at);
    if (at + 12 + length > bytes.size()) return false;
    const std::string_view type = bytes.substr(at + 4, 4);
    if (first && type != "IHDR") return false;
    first = false;
    const auto* crc_begin = reinterpret_cast<const Bytef*>(bytes.data() + at + 4);
    if (crc32(0L, crc_begin, 4 + length) != GetU32(bytes, at + 8 + length)) return false;
    at += 12 + length;
    if (type == "IEND") return at == bytes.size();
  }
  return false;
}

}  // namespace tida
