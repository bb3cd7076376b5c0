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

#include "blime/config.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <sstream>

#include "blime/error.h"

namespace blime {

namespace {

namespace fs = std::filesystem;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

template <typename T>
T ParseNumber(const Settings& settings, const std::string& key, T fallback) {
  auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  const std::string& text = it->second;
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("'" + key + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

bool ParseBool(const Settings& settings, const std::string& key, bool fallback) {
  auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" +
                    it->second + "'");
}

std::vector<double> ParseDoubleList(const std::string& key,
                                    std::string_view text) {
  std::vector<double> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view cell = Trim(text.substr(start, comma - start));
    double value = 0;
    auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
      throw ConfigError("'" + key + "': cannot parse '" + std::string(cell) +
                        "' as a number");
    }
    out.push_back(value);
    start = comma + 1;
  }
  return out;
}

std::string Get(const Settings& settings, const std::string& key,
                const std::string& fallback) {
  auto it = settings.find(key);
  return it == settings.end() ? fallback : it->second;
}

std::string ResolveAgainst(const fs::path& dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (dir / path).lexically_normal().string();
}

SegmentationSpec ParseSegmentation(const std::string& text) {
  SegmentationSpec spec;
  if (text.rfind("grid:", 0) == 0) {
    const std::string dims = text.substr(5);
    const size_t x = dims.find('x');
    int rows = 0, cols = 0;
    bool ok = x != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(dims.data(), dims.data() + x, rows);
      auto r2 = std::from_chars(dims.data() + x + 1, dims.data() + dims.size(), cols);
      ok = r1.ec == std::errc() && r1.ptr == dims.data() + x &&
           r2.ec == std::errc() && r2.ptr == dims.data() + dims.size();
    }
    if (!ok || rows < 1 || cols < 1) {
      throw ConfigError("'segmentation': expected grid:<rows>x<cols>, got '" +
                        text + "'");
    }
    spec.rows = rows;
    spec.cols = cols;
    return spec;
  }
  if (text.rfind("map:", 0) == 0 && text.size() > 4) {
    spec.is_grid = false;
    spec.map_path = text.substr(4);
    return spec;
  }
  throw ConfigError("'segmentation': expected grid:<rows>x<cols> or map:<path>, got '" +
                    text + "'");
}

ImageBaseline ParseBaseline(const std::string& text) {
  if (text == "mean") return PerSuperpixelMean{};
  if (text.rfind("color:", 0) == 0) {
    const std::vector<double> rgb = ParseDoubleList("baseline", text.substr(6));
    if (rgb.size() == 3 &&
        std::all_of(rgb.begin(), rgb.end(), [](double v) {
          return v >= 0 && v <= 255 && v == static_cast<int>(v);
        })) {
      return FixedColor{static_cast<uint8_t>(rgb[0]), static_cast<uint8_t>(rgb[1]),
                        static_cast<uint8_t>(rgb[2])};
    }
  }
  throw ConfigError("'baseline': expected mean or color:<r>,<g>,<b>, got '" +
                    text + "'");
}

}  // namespace

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = {
      "instance",
      "modality",
      "segmentation",
      "baseline",
      "tokenizer.lowercase",
      "predictor.kind",
      "predictor.command",
      "predictor.timeout_ms",
      "predictor.chunk_size",
      "predictor.beta",
      "predictor.members",
      "predictor.noise",
      "predictor.bias",
      "predictor.seed",
      "explained_class",
      "k_surrogates",
      "n_perturbations",
      "resample_masks",
      "prediction_mode",
      "kernel.width",
      "ridge.lambda",
      "surrogate.intercept",
      "surrogate.include_original",
      "surrogate.activation_prob",
      "seed",
      "out_dir",
      "workers",
  };
  return keys;
}

Settings ParseSettings(std::string_view text, std::string_view origin) {
  const std::string where = origin.empty() ? "config" : std::string(origin);
  const auto& keys = ConfigKeys();
  Settings settings;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(where + ":" + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    if (!settings.emplace(key, value).second) {
      throw ConfigError(where + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
  }
  return settings;
}

Settings LoadSettingsFile(const std::string& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  Settings settings = ParseSettings(text, path);
  const fs::path dir = fs::path(path).parent_path();
  if (auto it = settings.find("instance"); it != settings.end()) {
    it->second = ResolveAgainst(dir, it->second);
  }
  if (auto it = settings.find("segmentation");
      it != settings.end() && it->second.rfind("map:", 0) == 0) {
    it->second = "map:" + ResolveAgainst(dir, it->second.substr(4));
  }
  if (auto it = settings.find("predictor.command"); it != settings.end()) {
    std::string resolved;
    for (const std::string& token : SplitWhitespace(it->second)) {
      if (!resolved.empty()) resolved += ' ';
      resolved += token.find('/') != std::string::npos
                      ? ResolveAgainst(dir, token)
                      : token;
    }
    it->second = resolved;
  }
  return settings;
}

RunConfig ResolveRunConfig(const Settings& settings) {
  RunConfig config;
  config.instance = Get(settings, "instance", "");
  if (config.instance.empty()) throw ConfigError("'instance' is required");

  const std::string default_modality =
      fs::path(config.instance).extension() == ".png" ? "image" : "text";
  try {
    config.modality = ParseModality(Get(settings, "modality", default_modality));
  } catch (const InputError& e) {
    throw ConfigError(std::string("'modality': ") + e.what());
  }
  config.segmentation = ParseSegmentation(Get(settings, "segmentation", "grid:2x4"));
  config.baseline = ParseBaseline(Get(settings, "baseline", "mean"));
  config.lowercase = ParseBool(settings, "tokenizer.lowercase", true);

  const std::string kind = Get(settings, "predictor.kind", "synthetic");
  if (kind == "synthetic") {
    config.predictor_kind = PredictorKind::kSynthetic;
    if (settings.count("predictor.command")) {
      throw ConfigError("'predictor.command' given for a synthetic predictor");
    }
    auto it = settings.find("predictor.beta");
    if (it == settings.end()) {
      throw ConfigError("'predictor.beta' is required for the synthetic predictor");
    }
    config.beta = ParseDoubleList("predictor.beta", it->second);
  } else if (kind == "external") {
    config.predictor_kind = PredictorKind::kExternal;
    config.predictor_command = SplitWhitespace(Get(settings, "predictor.command", ""));
    if (config.predictor_command.empty()) {
      throw ConfigError("'predictor.command' is required for an external predictor");
    }
    if (settings.count("predictor.beta")) {
      throw ConfigError("'predictor.beta' given for an external predictor");
    }
  } else {
    throw ConfigError("'predictor.kind': expected synthetic or external, got '" +
                      kind + "'");
  }
  config.predictor_timeout_ms = ParseNumber<int>(settings, "predictor.timeout_ms", 10000);
  config.predictor_chunk_size = ParseNumber<int>(settings, "predictor.chunk_size", 256);
  config.members = ParseNumber<int>(settings, "predictor.members", 5);
  config.member_noise = ParseNumber<double>(settings, "predictor.noise", 0.2);
  config.bias = ParseNumber<double>(settings, "predictor.bias", 0.0);
  config.predictor_seed = ParseNumber<uint64_t>(settings, "predictor.seed", 0);
  if (config.predictor_timeout_ms <= 0) {
    throw ConfigError("'predictor.timeout_ms' must be positive");
  }
  if (config.predictor_chunk_size <= 0) {
    throw ConfigError("'predictor.chunk_size' must be positive");
  }
  if (config.members < 1) throw ConfigError("'predictor.members' must be >= 1");
  if (config.member_noise < 0) throw ConfigError("'predictor.noise' must be >= 0");

  config.explained_class = ParseNumber<int>(settings, "explained_class", 1);
  if (config.explained_class < 0) {
    throw ConfigError("'explained_class' must be nonnegative");
  }

  BlimeConfig& blime = config.blime;
  blime.k_surrogates = ParseNumber<int>(settings, "k_surrogates", 100);
  blime.n_perturbations = ParseNumber<int>(settings, "n_perturbations", 100);
  if (blime.k_surrogates < 2) throw ConfigError("'k_surrogates' must be >= 2");
  if (blime.n_perturbations < 2) {
    throw ConfigError("'n_perturbations' must be >= 2");
  }
  try {
    blime.resampling = ParseMaskResampling(Get(settings, "resample_masks", "true"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("'resample_masks': ") + e.what());
  }
  try {
    blime.prediction_mode =
        ParsePredictionMode(Get(settings, "prediction_mode", "mean"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("'prediction_mode': ") + e.what());
  }
  blime.kernel.width = ParseNumber<double>(
      settings, "kernel.width",
      config.modality == Modality::kImage ? kDefaultImageKernelWidth
                                          : kDefaultTextKernelWidth);
  if (!(blime.kernel.width > 0)) throw ConfigError("'kernel.width' must be > 0");
  blime.surrogate.ridge_lambda = ParseNumber<double>(settings, "ridge.lambda", 1.0);
  if (!(blime.surrogate.ridge_lambda >= 0)) {
    throw ConfigError("'ridge.lambda' must be >= 0");
  }
  blime.surrogate.fit_intercept = ParseBool(settings, "surrogate.intercept", true);
  blime.surrogate.include_original =
      ParseBool(settings, "surrogate.include_original", true);
  blime.surrogate.activation_prob =
      ParseNumber<double>(settings, "surrogate.activation_prob", 0.5);
  if (!(blime.surrogate.activation_prob > 0 && blime.surrogate.activation_prob < 1)) {
    throw ConfigError("'surrogate.activation_prob' must lie in (0, 1)");
  }
  blime.workers = ParseNumber<int>(settings, "workers", 1);
  if (blime.workers < 1) throw ConfigError("'workers' must be >= 1");

  config.seed = ParseNumber<uint64_t>(settings, "seed", 0);
  blime.master_seed = config.seed;
  config.out_dir = Get(settings, "out_dir", "out");
  return config;
}

std::string FormatSegmentation(const SegmentationSpec& spec) {
  if (spec.is_grid) {
    return "grid:" + std::to_string(spec.rows) + "x" + std::to_string(spec.cols);
  }
  return "map:" + spec.map_path;
}

nlohmann::json ToJson(const RunConfig& config) {
  nlohmann::json j;
  j["instance"] = config.instance;
  j["modality"] = std::string(ModalityName(config.modality));
  if (config.modality == Modality::kImage) {
    j["segmentation"] = FormatSegmentation(config.segmentation);
    if (const auto* color = std::get_if<FixedColor>(&config.baseline)) {
      j["baseline"] = "color:" + std::to_string(color->r) + "," +
                      std::to_string(color->g) + "," + std::to_string(color->b);
    } else {
      j["baseline"] = "mean";
    }
  } else {
    j["tokenizer.lowercase"] = config.lowercase;
  }
  if (config.predictor_kind == PredictorKind::kSynthetic) {
    j["predictor.kind"] = "synthetic";
    j["predictor.beta"] = config.beta;
    j["predictor.members"] = config.members;
    j["predictor.noise"] = config.member_noise;
    j["predictor.bias"] = config.bias;
    j["predictor.seed"] = config.predictor_seed;
  } else {
    j["predictor.kind"] = "external";
    j["predictor.command"] = config.predictor_command;
    j["predictor.timeout_ms"] = config.predictor_timeout_ms;
    j["predictor.chunk_size"] = config.predictor_chunk_size;
  }
  j["explained_class"] = config.explained_class;
  j["k_surrogates"] = config.blime.k_surrogates;
  j["n_perturbations"] = config.blime.n_perturbations;
  j["resample_masks"] = FormatMaskResampling(config.blime.resampling);
  j["prediction_mode"] = FormatPredictionMode(config.blime.prediction_mode);
  j["kernel.width"] = config.blime.kernel.width;
  j["ridge.lambda"] = config.blime.surrogate.ridge_lambda;
  j["surrogate.intercept"] = config.blime.surrogate.fit_intercept;
  j["surrogate.include_original"] = config.blime.surrogate.include_original;
  j["surrogate.activation_prob"] = config.blime.surrogate.activation_prob;
  j["seed"] = config.seed;
  return j;
}

}  // namespace blime
