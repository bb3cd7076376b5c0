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

#include "blime/interpretable.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "blime/error.h"

namespace blime {

namespace {

std::string CellName(int x, int y) {
  return "row " + std::to_string(y + 1) + ", column " + std::to_string(x + 1);
}

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

struct RawToken {
  std::string text;
  TokenSpan span;
};

std::vector<RawToken> ScanTokens(std::string_view text, bool lowercase) {
  std::vector<RawToken> out;
  size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && IsWordByte(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    std::string token(text.substr(i, j - i));
    if (lowercase) {
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    out.push_back({std::move(token), {i, j}});
    i = j;
  }
  return out;
}

// Splits [0, extent) into `parts` bands; returns band index per coordinate.
std::vector<int> BandIndex(int extent, int parts) {
  std::vector<int> index(extent);
  const int base = extent / parts;
  const int remainder = extent % parts;
  int pos = 0;
  for (int band = 0; band < parts; ++band) {
    const int size = base + (band < remainder ? 1 : 0);
    for (int k = 0; k < size; ++k) index[pos++] = band;
  }
  return index;
}

uint8_t RoundHalfUp(double value) {
  return static_cast<uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
}

}  // namespace

SegmentMap SegmentMap::FromLabels(int width, int height,
                                  std::vector<int> labels) {
  if (width <= 0 || height <= 0) {
    throw InputError("segment map dimensions must be positive");
  }
  if (labels.size() != static_cast<size_t>(width) * height) {
    throw InputError("segment map has " + std::to_string(labels.size()) +
                     " cells, expected " + std::to_string(width * height));
  }
  int max_label = -1;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw InputError("negative label at " +
                       CellName(static_cast<int>(i % width),
                                static_cast<int>(i / width)));
    }
    max_label = std::max(max_label, labels[i]);
  }
  std::vector<bool> seen(max_label + 1, false);
  for (int label : labels) seen[label] = true;
  for (int label = 0; label <= max_label; ++label) {
    if (!seen[label]) {
      // Report the first cell carrying a label above the gap.
      for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > label) {
          throw InputError(
              "labels are not contiguous: label " + std::to_string(label) +
              " is missing but " + std::to_string(labels[i]) +
              " occurs at " +
              CellName(static_cast<int>(i % width),
                       static_cast<int>(i / width)));
        }
      }
    }
  }
  SegmentMap map;
  map.width = width;
  map.height = height;
  map.num_components = max_label + 1;
  map.labels = std::move(labels);
  return map;
}

SegmentMap GridSegment(const Image& image, int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw InputError("grid segmentation needs rows * cols >= 2");
  }
  if (rows > image.height || cols > image.width) {
    throw InputError("grid " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " exceeds image size " +
                     std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  }
  const std::vector<int> row_band = BandIndex(image.height, rows);
  const std::vector<int> col_band = BandIndex(image.width, cols);
  std::vector<int> labels(image.num_pixels());
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      labels[static_cast<size_t>(y) * image.width + x] =
          row_band[y] * cols + col_band[x];
    }
  }
  return SegmentMap::FromLabels(image.width, image.height, std::move(labels));
}

SegmentMap ParseSegmentMap(std::string_view csv, const Image& image) {
  std::vector<int> labels;
  labels.reserve(image.num_pixels());
  int y = 0;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (y >= image.height) {
      throw InputError("segment map has more rows than the image height " +
                       std::to_string(image.height));
    }
    int x = 0;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      std::string_view cell = line.substr(
          start, comma == std::string_view::npos ? line.size() - start
                                                 : comma - start);
      while (!cell.empty() && IsSpace(cell.front())) cell.remove_prefix(1);
      while (!cell.empty() && IsSpace(cell.back())) cell.remove_suffix(1);
      int value = 0;
      auto [end, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw InputError("malformed label '" + std::string(cell) + "' at " +
                         CellName(x, y));
      }
      if (x >= image.width) {
        throw InputError("segment map row " + std::to_string(y + 1) +
                         " is wider than the image width " +
                         std::to_string(image.width));
      }
      if (value < 0) {
        throw InputError("negative label at " + CellName(x, y));
      }
      labels.push_back(value);
      ++x;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (x != image.width) {
      throw InputError("segment map row " + std::to_string(y + 1) + " has " +
                       std::to_string(x) + " cells, expected " +
                       std::to_string(image.width));
    }
    ++y;
  }
  if (y != image.height) {
    throw InputError("segment map has " + std::to_string(y) +
                     " rows, expected " + std::to_string(image.height));
  }
  return SegmentMap::FromLabels(image.width, image.height, std::move(labels));
}

SegmentMap LoadSegmentMap(const std::string& path, const Image& image) {
  const std::string content = ReadTextFile(path);
  try {
    return ParseSegmentMap(content, image);
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

TokenMap Tokenize(const std::string& text, bool lowercase) {
  TokenMap map;
  map.lowercase = lowercase;
  std::unordered_map<std::string, int> index;
  for (RawToken& raw : ScanTokens(text, lowercase)) {
    auto [it, inserted] =
        index.emplace(raw.text, static_cast<int>(map.tokens.size()));
    if (inserted) {
      map.tokens.push_back(std::move(raw.text));
      map.occurrences.emplace_back();
    }
    map.occurrences[it->second].push_back(raw.span);
  }
  if (map.tokens.empty()) throw InputError("document contains no tokens");
  return map;
}

InterpretableInstance InterpretableInstance::ForImage(Image image,
                                                      SegmentMap segments,
                                                      ImageBaseline baseline) {
  if (segments.width != image.width || segments.height != image.height) {
    throw InputError("segment map is " + std::to_string(segments.width) + "x" +
                     std::to_string(segments.height) + " but image is " +
                     std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  }
  if (segments.num_components < 2) {
    throw InputError("need at least 2 interpretable components");
  }

  const int m = segments.num_components;
  const int channels = image.channels;
  Image base(image.width, image.height, channels);
  std::vector<uint8_t> fill(static_cast<size_t>(m) * channels);

  if (std::holds_alternative<PerSuperpixelMean>(baseline)) {
    std::vector<double> sums(static_cast<size_t>(m) * channels, 0.0);
    std::vector<size_t> counts(m, 0);
    for (size_t p = 0; p < image.num_pixels(); ++p) {
      const int label = segments.labels[p];
      ++counts[label];
      for (int c = 0; c < channels; ++c) {
        sums[static_cast<size_t>(label) * channels + c] +=
            image.pixels[p * channels + c];
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int c = 0; c < channels; ++c) {
        fill[static_cast<size_t>(j) * channels + c] = RoundHalfUp(
            sums[static_cast<size_t>(j) * channels + c] / counts[j]);
      }
    }
  } else {
    const FixedColor color = std::get<FixedColor>(baseline);
    for (int j = 0; j < m; ++j) {
      if (channels == 3) {
        fill[static_cast<size_t>(j) * 3 + 0] = color.r;
        fill[static_cast<size_t>(j) * 3 + 1] = color.g;
        fill[static_cast<size_t>(j) * 3 + 2] = color.b;
      } else {
        // Gray images take the channel average of the colour.
        fill[j] = RoundHalfUp((color.r + color.g + color.b) / 3.0);
      }
    }
  }
  for (size_t p = 0; p < image.num_pixels(); ++p) {
    const int label = segments.labels[p];
    for (int c = 0; c < channels; ++c) {
      base.pixels[p * channels + c] =
          fill[static_cast<size_t>(label) * channels + c];
    }
  }

  InterpretableInstance out;
  out.num_components_ = m;
  out.original_ = std::move(image);
  out.layout_ = std::move(segments);
  out.baseline_image_ = std::move(base);
  return out;
}

InterpretableInstance InterpretableInstance::ForText(std::string text,
                                                     bool lowercase) {
  TokenMap tokens = Tokenize(text, lowercase);
  if (tokens.num_components() < 2) {
    throw InputError("need at least 2 distinct tokens, document has " +
                     std::to_string(tokens.num_components()));
  }
  InterpretableInstance out;
  out.num_components_ = tokens.num_components();
  out.original_ = std::move(text);
  out.layout_ = std::move(tokens);
  return out;
}

std::vector<std::string> InterpretableInstance::ComponentNames() const {
  if (modality() == Modality::kText) return tokens().tokens;
  std::vector<std::string> names;
  for (int j = 0; j < num_components_; ++j) {
    names.push_back("s" + std::to_string(j + 1));
  }
  return names;
}

Instance InterpretableInstance::Reconstruct(
    std::span<const uint8_t> mask) const {
  if (mask.size() != static_cast<size_t>(num_components_)) {
    throw InputError("mask has length " + std::to_string(mask.size()) +
                     ", expected " + std::to_string(num_components_));
  }
  const bool all_on =
      std::all_of(mask.begin(), mask.end(), [](uint8_t v) { return v != 0; });
  if (all_on) return original_;

  if (modality() == Modality::kImage) {
    Image out = std::get<Image>(original_);
    const SegmentMap& seg = segments();
    const int channels = out.channels;
    for (size_t p = 0; p < out.num_pixels(); ++p) {
      if (mask[seg.labels[p]] == 0) {
        for (int c = 0; c < channels; ++c) {
          out.pixels[p * channels + c] = baseline_image_.pixels[p * channels + c];
        }
      }
    }
    return out;
  }

  const std::string& text = std::get<std::string>(original_);
  const TokenMap& map = tokens();
  std::vector<TokenSpan> removed;
  for (int j = 0; j < num_components_; ++j) {
    if (mask[j] == 0) {
      removed.insert(removed.end(), map.occurrences[j].begin(),
                     map.occurrences[j].end());
    }
  }
  std::sort(removed.begin(), removed.end(),
            [](const TokenSpan& a, const TokenSpan& b) {
              return a.begin < b.begin;
            });
  std::string kept;
  kept.reserve(text.size());
  size_t cursor = 0;
  for (const TokenSpan& span : removed) {
    kept.append(text, cursor, span.begin - cursor);
    cursor = span.end;
  }
  kept.append(text, cursor, std::string::npos);

  std::string out;
  out.reserve(kept.size());
  bool pending_space = false;
  for (char c : kept) {
    if (IsSpace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Mask InterpretableInstance::RecoverMask(const Instance& instance) const {
  if (ModalityOf(instance) != modality()) {
    throw InputError("instance modality does not match the explained instance");
  }
  Mask mask(num_components_, 0);

  if (modality() == Modality::kImage) {
    const Image& image = std::get<Image>(instance);
    const Image& original = std::get<Image>(original_);
    if (image.width != original.width || image.height != original.height ||
        image.channels != original.channels) {
      throw InputError("instance dimensions differ from the explained image");
    }
    std::vector<uint8_t> matches_original(num_components_, 1);
    std::vector<uint8_t> matches_baseline(num_components_, 1);
    const SegmentMap& seg = segments();
    const size_t n = image.pixels.size();
    const int channels = image.channels;
    for (size_t i = 0; i < n; ++i) {
      const int label = seg.labels[i / channels];
      const uint8_t v = image.pixels[i];
      if (v != original.pixels[i]) matches_original[label] = 0;
      if (v != baseline_image_.pixels[i]) matches_baseline[label] = 0;
    }
    for (int j = 0; j < num_components_; ++j) {
      if (matches_original[j]) {
        mask[j] = 1;
      } else if (!matches_baseline[j]) {
        throw InputError("component " + std::to_string(j + 1) +
                         " is neither original nor baseline content");
      }
    }
    return mask;
  }

  const TokenMap& map = tokens();
  std::unordered_map<std::string_view, int> index;
  for (int j = 0; j < num_components_; ++j) index.emplace(map.tokens[j], j);
  const auto found = ScanTokens(std::get<std::string>(instance), map.lowercase);
  for (const RawToken& raw : found) {
    auto it = index.find(raw.text);
    if (it == index.end()) {
      throw InputError("token '" + raw.text +
                       "' does not occur in the explained document");
    }
    mask[it->second] = 1;
  }
  return mask;
}

}  // namespace blime
