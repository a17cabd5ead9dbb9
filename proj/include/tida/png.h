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

#include <cstdint>
#include <span>
#include <string>

namespace tida {

// Encodes 8-bit RGB pixels (row-major, 3 bytes per pixel) as a PNG file.
std::string EncodePngRgb(uint32_t width, uint32_t height, std::span<const uint8_t> rgb);

// Cheap structural check: signature, IHDR first, IEND last, every chunk CRC valid.
bool LooksLikePng(std::string_view bytes);

}  // namespace tida
