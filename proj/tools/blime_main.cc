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

// Command-line front end: explain, sweep, variability and render.
//
// Exit codes: 0 success, 2 config/input error, 3 predictor/protocol error,
// 4 I/O error, 130 interrupted.

#include <csignal>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blime/config.h"
#include "blime/error.h"
#include "blime/experiments.h"
#include "blime/parallel.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitIo = 4;
constexpr int kExitInterrupted = 130;

extern "C" void OnInterrupt(int) { blime::RequestCancellation(); }

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string cell = text.substr(start, comma - start);
    try {
      size_t used = 0;
      out.push_back(std::stoi(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw blime::ConfigError("'--values': cannot parse '" + cell +
                               "' as an integer");
    }
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrapped local surrogate explanations with ordinal "
               "consensus uncertainty"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool dump_ranks = false;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_flag("--dump-ranks", dump_ranks,
               "Also write every rank matrix (sweep: ranks.json)");

  // Every config key doubles as a --<key> override.
  std::map<std::string, std::optional<std::string>> overrides;
  for (const std::string& key : blime::ConfigKeys()) {
    overrides[key];
    std::string names = "--" + key;
    if (key == "out_dir") names = "--out,--out_dir";
    app.add_option(names, overrides[key], "Override config key '" + key + "'");
  }

  CLI::App* explain = app.add_subcommand(
      "explain", "Run BLIME once; write report.json and figures");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Repeat BLIME across perturbation or surrogate counts");
  std::string sweep_param = "perturbations";
  std::string sweep_values;
  int replicates = 20;
  sweep->add_option("--param", sweep_param, "perturbations or surrogates")
      ->capture_default_str();
  sweep->add_option("--values", sweep_values,
                    "Ascending comma-separated values (default grid per param)");
  sweep->add_option("--replicates", replicates, "Replicates per value")
      ->capture_default_str();

  CLI::App* variability = app.add_subcommand(
      "variability", "Coefficient distributions under one diversity source");
  std::string variability_mode = "sampling";
  variability->add_option("--mode", variability_mode, "sampling or predictive")
      ->capture_default_str();

  CLI::App* render =
      app.add_subcommand("render", "Render a sweep or variability CSV to SVG");
  std::string csv_path;
  std::string render_kind = "lines";
  render->add_option("--csv", csv_path, "Input CSV")->required();
  render->add_option("--kind", render_kind, "lines or violins")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::signal(SIGINT, OnInterrupt);
  std::signal(SIGTERM, OnInterrupt);

  try {
    if (render->parsed()) {
      std::string out = overrides["out_dir"].value_or("");
      if (out.empty()) {
        out = csv_path.substr(0, csv_path.rfind('.')) + ".svg";
      }
      blime::CmdRender(csv_path, blime::ParseRenderKind(render_kind), out);
      std::cout << "wrote " << out << "\n";
      return 0;
    }

    blime::Settings settings;
    if (!config_path.empty()) settings = blime::LoadSettingsFile(config_path);
    for (const auto& [key, value] : overrides) {
      if (value) settings[key] = *value;
    }
    const blime::RunConfig config = blime::ResolveRunConfig(settings);

    if (explain->parsed()) {
      const blime::ExplainOutput out = blime::CmdExplain(config);
      for (const std::string& w : out.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "K=" << out.report.k_surrogates
                << " M=" << out.report.m_components
                << " W=" << out.report.kendall_w
                << " kappa=" << out.report.fleiss_kappa << "\n"
                << "wrote " << config.out_dir << "/report.json\n";
    } else if (sweep->parsed()) {
      const blime::SweepParameter param = blime::ParseSweepParameter(sweep_param);
      std::vector<int> values =
          sweep_values.empty()
              ? (param == blime::SweepParameter::kPerturbations
                     ? blime::kDefaultPerturbationGrid
                     : blime::kDefaultSurrogateGrid)
              : ParseIntList(sweep_values);
      blime::CmdSweep(config, param, values, replicates, dump_ranks);
      std::cout << "wrote " << config.out_dir << "/sweep.csv\n";
    } else if (variability->parsed()) {
      const blime::VariabilityMode mode =
          blime::ParseVariabilityMode(variability_mode);
      blime::CmdVariability(config, mode);
      std::cout << "wrote " << config.out_dir << "/variability_"
                << blime::VariabilityModeName(mode) << ".{csv,svg}\n";
    }
    return 0;
  } catch (const blime::Cancelled&) {
    std::cerr << "interrupted\n";
    return kExitInterrupted;
  } catch (const blime::ProtocolError& e) {
    std::cerr << "predictor error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const blime::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const blime::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
