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

#ifndef BLIME_INTERPRETABLE_H_
#define BLIME_INTERPRETABLE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blime/instance.h"

namespace blime {

// Binary on/off pattern over the M interpretable components.
using Mask = std::vector<uint8_t>;

// Per-pixel superpixel labels. Labels are contiguous: every index in
// [0, num_components) occurs at least once.
struct SegmentMap {
  int width = 0;
  int height = 0;
  int num_components = 0;
  std::vector<int> labels;  // row-major, width * height

  // Validates dimensions and label contiguity; throws InputError naming the
  // first offending cell.
  static SegmentMap FromLabels(int width, int height, std::vector<int> labels);

  int label(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;  // exclusive
};

// Distinct token types of a document, in order of first appearance, with the
// byte spans of every occurrence.
struct TokenMap {
  std::vector<std::string> tokens;
  std::vector<std::vector<TokenSpan>> occurrences;
  bool lowercase = false;

  int num_components() const { return static_cast<int>(tokens.size()); }
};

// Splits [0, height) x [0, width) into rows x cols bands. The first
// (height % rows) row bands are one pixel taller, likewise for columns.
SegmentMap GridSegment(const Image& image, int rows, int cols);

// Parses a CSV label map (one line per pixel row, comma-separated integer
// labels) and validates it against `image`.
SegmentMap ParseSegmentMap(std::string_view csv, const Image& image);
SegmentMap LoadSegmentMap(const std::string& path, const Image& image);

// Tokens are maximal runs of ASCII alphanumerics; bytes >= 0x80 count as word
// characters so UTF-8 words stay whole. Case folding is ASCII-only.
// Throws InputError if the document has no tokens.
TokenMap Tokenize(const std::string& text, bool lowercase);

// Baselines substituted for switched-off superpixels.
struct PerSuperpixelMean {};
struct FixedColor {
  uint8_t r = 0, g = 0, b = 0;
};
using ImageBaseline = std::variant<PerSuperpixelMean, FixedColor>;

// An instance together with its interpretable components and masking rule.
// Immutable after construction.
class InterpretableInstance {
 public:
  static InterpretableInstance ForImage(Image image, SegmentMap segments,
                                        ImageBaseline baseline = {});
  static InterpretableInstance ForText(std::string text, bool lowercase);

  Modality modality() const { return ModalityOf(original_); }
  int num_components() const { return num_components_; }
  const Instance& original() const { return original_; }

  // Only valid for the matching modality.
  const SegmentMap& segments() const { return std::get<SegmentMap>(layout_); }
  const TokenMap& tokens() const { return std::get<TokenMap>(layout_); }
  const Image& baseline_image() const { return baseline_image_; }

  // Human-readable component names: token text, or "s1".."sM" for images.
  std::vector<std::string> ComponentNames() const;

  // Image: pixels of switched-off components take the baseline colour.
  // Text: every occurrence of a switched-off token type is deleted and
  // whitespace runs collapse to single spaces. The all-ones mask returns the
  // original bit-exactly.
  Instance Reconstruct(std::span<const uint8_t> mask) const;

  // Inverse of Reconstruct. A component whose content equals the original is
  // reported as present. Throws InputError if `instance` cannot be produced
  // by masking this instance.
  Mask RecoverMask(const Instance& instance) const;

 private:
  InterpretableInstance() = default;

  Instance original_;
  std::variant<SegmentMap, TokenMap> layout_;
  Image baseline_image_;
  int num_components_ = 0;
};

}  // namespace blime

#endif  // BLIME_INTERPRETABLE_H_
