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

#ifndef BLIME_CONFIG_H_
#define BLIME_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blime/blime.h"
#include "blime/instance.h"
#include "blime/interpretable.h"
#include "json.hpp"

namespace blime {

// Raw key/value settings, as read from a config file or the command line.
using Settings = std::map<std::string, std::string>;

// Every key understood by the harness, in documentation order.
const std::vector<std::string>& ConfigKeys();

// Parses the flat `key = value` format: one setting per line, '#' starts a
// comment, blank lines ignored. Unknown keys and duplicates are ConfigErrors.
Settings ParseSettings(std::string_view text, std::string_view origin = "");

// Reads a config file. Relative paths in `instance`, `segmentation` (map:)
// and `predictor.command` resolve against the file's directory.
Settings LoadSettingsFile(const std::string& path);

enum class PredictorKind { kSynthetic, kExternal };

struct SegmentationSpec {
  // grid:<rows>x<cols> or map:<path>
  bool is_grid = true;
  int rows = 2;
  int cols = 4;
  std::string map_path;
};

struct RunConfig {
  std::string instance;
  Modality modality = Modality::kImage;
  SegmentationSpec segmentation;
  ImageBaseline baseline = PerSuperpixelMean{};
  bool lowercase = true;

  PredictorKind predictor_kind = PredictorKind::kSynthetic;
  std::vector<std::string> predictor_command;
  int predictor_timeout_ms = 10000;
  int predictor_chunk_size = 256;
  std::vector<double> beta;
  int members = 5;
  double member_noise = 0.2;
  double bias = 0.0;
  uint64_t predictor_seed = 0;

  int explained_class = 1;
  BlimeConfig blime;
  uint64_t seed = 0;
  std::string out_dir = "out";
};

// Validates and types the settings. Throws ConfigError naming the key.
RunConfig ResolveRunConfig(const Settings& settings);

// Resolved configuration as JSON. Execution-only settings (out_dir, workers)
// are omitted so reports do not depend on where or how they were produced.
nlohmann::json ToJson(const RunConfig& config);

std::string FormatSegmentation(const SegmentationSpec& spec);

}  // namespace blime

#endif  // BLIME_CONFIG_H_
