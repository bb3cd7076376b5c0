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

// Python bindings for the BLIME core: ranking, consensus statistics, the
// ridge surrogate, segmentation helpers and the explain/sweep drivers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blime/blime.h"
#include "blime/config.h"
#include "blime/consensus.h"
#include "blime/error.h"
#include "blime/experiments.h"
#include "blime/interpretable.h"
#include "blime/surrogate.h"

namespace py = pybind11;

namespace blime {
namespace {

using Rows = std::vector<std::vector<double>>;

py::object ToPython(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

TiePolicy ParseTiePolicy(const std::string& text) {
  if (text == "average") return TiePolicy::kAverageRanks;
  if (text == "index") return TiePolicy::kIndexOrder;
  throw InputError("tie_policy must be 'average' or 'index', got '" + text + "'");
}

RankingMatrix Ranks(const Rows& rows) {
  return RankingMatrix::FromRows(rows, TiePolicy::kAverageRanks);
}

MaskMatrix ToMasks(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw InputError("mask matrix is empty");
  MaskMatrix masks(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InputError("ragged mask matrix");
    for (size_t j = 0; j < rows[i].size(); ++j) {
      if (rows[i][j] != 0 && rows[i][j] != 1) throw InputError("masks must be 0/1");
      masks(static_cast<int>(i), static_cast<int>(j)) = static_cast<uint8_t>(rows[i][j]);
    }
  }
  return masks;
}

RunConfig ConfigFrom(const std::optional<std::string>& path,
                     const std::map<std::string, std::string>& overrides) {
  Settings settings;
  if (path) settings = LoadSettingsFile(*path);
  for (const auto& [key, value] : overrides) {
    if (std::find(ConfigKeys().begin(), ConfigKeys().end(), key) == ConfigKeys().end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    settings[key] = value;
  }
  return ResolveRunConfig(settings);
}

}  // namespace
}  // namespace blime

PYBIND11_MODULE(_blime, m) {
  using namespace blime;
  m.doc() = "Bootstrapped local surrogate explanations with ordinal consensus";

  // Base class first: translators registered later are tried first.
  static py::exception<Error> error(m, "BlimeError");
  static py::exception<InputError> input_error(m, "InputError", error.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<ProtocolError> protocol_error(m, "ProtocolError", error.ptr());
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const ProtocolError& e) {
      py::set_error(protocol_error, e.what());
    } catch (const IoError& e) {
      py::set_error(io_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.attr("RANK_CONVENTION") = std::string(kRankConvention);

  m.def(
      "rank_coefficients",
      [](const std::vector<double>& alpha, const std::string& tie_policy) {
        return RankCoefficients(alpha, ParseTiePolicy(tie_policy));
      },
      py::arg("alpha"), py::arg("tie_policy") = "average",
      "Rank one coefficient vector; rank 1 = smallest coefficient.");

  m.def(
      "mean_ranks", [](const Rows& ranks) { return MeanRanks(Ranks(ranks)); },
      py::arg("ranks"));
  m.def(
      "ordinal_consensus",
      [](const Rows& ranks, int j) { return OrdinalConsensus(Ranks(ranks), j); },
      py::arg("ranks"), py::arg("j"));
  m.def(
      "fleiss_kappa", [](const Rows& ranks) { return FleissKappa(Ranks(ranks)); },
      py::arg("ranks"));
  m.def(
      "kendall_w", [](const Rows& ranks) { return KendallW(Ranks(ranks)).w; },
      py::arg("ranks"));
  m.def(
      "build_report",
      [](const Rows& ranks) { return ToPython(ToJson(BuildReport(Ranks(ranks)))); },
      py::arg("ranks"), "Consensus report for a K x M average-rank matrix.");

  m.def(
      "kernel_weights",
      [](const std::vector<std::vector<int>>& masks, double width) {
        return KernelWeights(ToMasks(masks), KernelConfig{width});
      },
      py::arg("masks"), py::arg("width") = kDefaultImageKernelWidth);

  m.def(
      "fit_weighted_ridge",
      [](const Rows& design, const std::vector<double>& targets,
         const std::vector<double>& weights, double ridge_lambda) {
        if (design.empty()) throw InputError("design is empty");
        Eigen::MatrixXd z(design.size(), design[0].size());
        for (size_t i = 0; i < design.size(); ++i) {
          if (design[i].size() != design[0].size()) throw InputError("ragged design");
          for (size_t j = 0; j < design[i].size(); ++j) z(i, j) = design[i][j];
        }
        SurrogateConfig config;
        config.ridge_lambda = ridge_lambda;
        const SurrogateCoefficients c = FitWeightedRidge(z, targets, weights, config);
        py::dict out;
        out["alpha"] = c.alpha;
        out["intercept"] = c.intercept;
        out["weighted_r2"] = c.weighted_r2;
        out["rank_deficient"] = c.rank_deficient;
        return out;
      },
      py::arg("design"), py::arg("targets"), py::arg("weights"),
      py::arg("ridge_lambda") = 1.0,
      "Weighted ridge fit with an unpenalized intercept.");

  m.def(
      "grid_segment",
      [](int width, int height, int rows, int cols) {
        return GridSegment(Image(width, height, 1), rows, cols).labels;
      },
      py::arg("width"), py::arg("height"), py::arg("rows"), py::arg("cols"),
      "Row-major grid labels for a width x height image.");

  m.def(
      "tokenize",
      [](const std::string& text, bool lowercase) {
        return Tokenize(text, lowercase).tokens;
      },
      py::arg("text"), py::arg("lowercase") = true);

  m.def(
      "explain",
      [](std::optional<std::string> config_path,
         std::map<std::string, std::string> overrides, bool write) {
        ExplainOutput out;
        {
          py::gil_scoped_release release;
          const RunConfig config = ConfigFrom(config_path, overrides);
          out = write ? CmdExplain(config) : ComputeExplain(PrepareRun(config));
        }
        return ToPython(out.report_json);
      },
      py::arg("config_path") = py::none(),
      py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("write") = false,
      "Run BLIME once and return the report as a dict; write=True also writes "
      "report.json and figures to out_dir.");

  m.def(
      "sweep",
      [](std::optional<std::string> config_path,
         std::map<std::string, std::string> overrides, const std::string& parameter,
         const std::vector<int>& values, int replicates) {
        std::string csv;
        {
          py::gil_scoped_release release;
          const PreparedRun run = PrepareRun(ConfigFrom(config_path, overrides));
          csv = SweepCsv(RunSweep(run, ParseSweepParameter(parameter), values,
                                  replicates));
        }
        return csv;
      },
      py::arg("config_path") = py::none(),
      py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("parameter") = "perturbations",
      py::arg("values") = kDefaultPerturbationGrid, py::arg("replicates") = 20,
      "Run a sweep and return sweep.csv contents.");
}
