/*
 * Copyright 2026 The BLIME Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLIME_INSTANCE_H_
#define BLIME_INSTANCE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace blime {

// 8-bit raster image, row-major with interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int width, int height, int channels);

  size_t num_pixels() const { return static_cast<size_t>(width) * height; }
  uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

enum class Modality { kImage, kText };

// One data point to be explained: an image or a UTF-8 text document.
using Instance = std::variant<Image, std::string>;

Modality ModalityOf(const Instance& instance);
std::string_view ModalityName(Modality modality);
// Accepts "image" or "text"; throws InputError otherwise.
Modality ParseModality(std::string_view name);

// PNG codec (8-bit gray or RGB; palette, alpha and 16-bit inputs are reduced
// to those). Throws IoError on filesystem failures, InputError on bad data.
Image ReadPng(const std::string& path);
void WritePng(const std::string& path, const Image& image);

std::string ReadTextFile(const std::string& path);

}  // namespace blime

#endif  // BLIME_INSTANCE_H_
