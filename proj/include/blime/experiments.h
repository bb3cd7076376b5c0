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

#ifndef BLIME_EXPERIMENTS_H_
#define BLIME_EXPERIMENTS_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "blime/blime.h"
#include "blime/config.h"
#include "blime/consensus.h"
#include "blime/interpretable.h"
#include "blime/predictor.h"
#include "json.hpp"

namespace blime {

// Loaded instance, interpretable layout and predictor for one RunConfig.
struct PreparedRun {
  RunConfig config;
  std::shared_ptr<const InterpretableInstance> interp;
  std::shared_ptr<const Predictor> predictor;
};

// Throws ConfigError / IoError / InputError / ProtocolError.
PreparedRun PrepareRun(const RunConfig& config);

// ---- explain ----

struct ExplainOutput {
  BlimeResult result;
  ConsensusReport report;
  std::vector<int> absolute_ranking;
  nlohmann::json report_json;
  // File name -> SVG content.
  std::map<std::string, std::string> figures;
  std::vector<std::string> warnings;
};

ExplainOutput ComputeExplain(const PreparedRun& run);

// Runs BLIME once and writes report.json plus the figures into out_dir.
ExplainOutput CmdExplain(const RunConfig& config);

// ---- sweep ----

enum class SweepParameter { kPerturbations, kSurrogates };

std::string_view SweepParameterName(SweepParameter parameter);
SweepParameter ParseSweepParameter(std::string_view text);

inline const std::vector<int> kDefaultPerturbationGrid = {25, 50, 100, 200, 400};
inline const std::vector<int> kDefaultSurrogateGrid = {10, 25, 50, 100, 200};

struct SweepRecord {
  int parameter_value = 0;
  int replicate = 0;
  double kendall_w = 0.0;
  double fleiss_kappa = 0.0;
  std::vector<double> mean_ranks;
  std::vector<double> consensus;
  RankingMatrix ranks;  // AverageRanks
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kPerturbations;
  std::vector<int> values;
  int replicates = 0;
  int m = 0;
  std::vector<SweepRecord> records;  // value-major, then replicate
};

// Replicate r of every swept value uses master seed DeriveSeed(seed, r).
SweepResult RunSweep(const PreparedRun& run, SweepParameter parameter,
                     const std::vector<int>& values, int replicates);

// Header: parameter_value,replicate,kendall_w,fleiss_kappa,
// mean_rank_1..mean_rank_M,consensus_1..consensus_M. Reals use %.17g.
std::string SweepCsv(const SweepResult& sweep);
nlohmann::json SweepRanksJson(const SweepResult& sweep);

// Writes sweep.csv (and ranks.json when dump_ranks) into out_dir.
SweepResult CmdSweep(const RunConfig& config, SweepParameter parameter,
                     const std::vector<int>& values, int replicates,
                     bool dump_ranks);

// ---- variability ----

enum class VariabilityMode { kSampling, kPredictive };

std::string_view VariabilityModeName(VariabilityMode mode);
VariabilityMode ParseVariabilityMode(std::string_view text);

// sampling: fresh mask sets, ensemble-mean predictions.
// predictive: one fixed mask set, one member drawn per perturbation.
CoefficientEnsemble RunVariability(const PreparedRun& run, VariabilityMode mode);

// Header: surrogate,alpha_<name1>,...,alpha_<nameM>.
std::string VariabilityCsv(const CoefficientEnsemble& coefficients,
                           const std::vector<std::string>& names);

// Writes variability_<mode>.csv and variability_<mode>.svg into out_dir.
CoefficientEnsemble CmdVariability(const RunConfig& config, VariabilityMode mode);

// ---- render ----

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws InputError when missing.
  size_t column(std::string_view name) const;
};

CsvTable ParseCsv(std::string_view text);

enum class RenderKind { kLines, kViolins };
RenderKind ParseRenderKind(std::string_view text);

// lines: a sweep CSV; per-component mean rank and consensus averaged over
// replicates against the swept value. violins: a variability CSV.
std::string RenderCsv(const CsvTable& table, RenderKind kind,
                      std::string_view title);

void CmdRender(const std::string& csv_path, RenderKind kind,
               const std::string& out_path);

// Writes via a temporary file in the same directory and an atomic rename.
void WriteFileAtomic(const std::string& path, std::string_view content);

}  // namespace blime

#endif  // BLIME_EXPERIMENTS_H_
