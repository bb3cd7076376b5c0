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

#include "blime/experiments.h"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "blime/error.h"
#include "blime/figures.h"

namespace blime {

namespace {

namespace fs = std::filesystem;

std::string Real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

nlohmann::json Rows(const std::vector<std::vector<double>>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) out.push_back(row);
  return out;
}

}  // namespace

void WriteFileAtomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("failed writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

PreparedRun PrepareRun(const RunConfig& config) {
  PreparedRun run;
  run.config = config;

  if (config.modality == Modality::kImage) {
    Image image = ReadPng(config.instance);
    SegmentMap segments =
        config.segmentation.is_grid
            ? GridSegment(image, config.segmentation.rows, config.segmentation.cols)
            : LoadSegmentMap(config.segmentation.map_path, image);
    run.interp = std::make_shared<InterpretableInstance>(
        InterpretableInstance::ForImage(std::move(image), std::move(segments),
                                        config.baseline));
  } else {
    run.interp = std::make_shared<InterpretableInstance>(
        InterpretableInstance::ForText(ReadTextFile(config.instance),
                                       config.lowercase));
  }

  if (config.predictor_kind == PredictorKind::kSynthetic) {
    if (config.beta.size() != static_cast<size_t>(run.interp->num_components())) {
      throw ConfigError("'predictor.beta' has " + std::to_string(config.beta.size()) +
                        " entries but the instance has " +
                        std::to_string(run.interp->num_components()) +
                        " components");
    }
    SyntheticEnsembleSpec spec;
    spec.member_count = config.members;
    spec.base_weights = config.beta;
    spec.member_noise_scale = config.member_noise;
    spec.bias = config.bias;
    spec.seed = config.predictor_seed;
    run.predictor = std::make_shared<SyntheticEnsemble>(spec, run.interp);
  } else {
    ExternalPredictorOptions options;
    options.timeout = std::chrono::milliseconds(config.predictor_timeout_ms);
    options.chunk_size = static_cast<size_t>(config.predictor_chunk_size);
    run.predictor =
        std::make_shared<ExternalPredictor>(config.predictor_command, options);
    if (run.predictor->modality() != config.modality) {
      throw ConfigError("external predictor accepts " +
                        std::string(ModalityName(run.predictor->modality())) +
                        " instances but the config modality is " +
                        std::string(ModalityName(config.modality)));
    }
  }
  if (config.explained_class >= run.predictor->num_classes()) {
    throw ConfigError("'explained_class' " + std::to_string(config.explained_class) +
                      " out of range for " +
                      std::to_string(run.predictor->num_classes()) + " classes");
  }
  if (const auto* fixed = std::get_if<FixedMember>(&config.blime.prediction_mode)) {
    if (fixed->index >= run.predictor->num_members()) {
      throw ConfigError("'prediction_mode' member " + std::to_string(fixed->index) +
                        " out of range for " +
                        std::to_string(run.predictor->num_members()) + " members");
    }
  }
  return run;
}

ExplainOutput ComputeExplain(const PreparedRun& run) {
  ExplainOutput out;
  out.result = RunBlime(*run.interp, *run.predictor, run.config.explained_class,
                        run.config.blime);
  out.report = BuildReport(out.result.ranks);
  out.absolute_ranking = AbsoluteRanking(out.report.mean_ranks);

  const CoefficientEnsemble& coef = out.result.coefficients;
  std::vector<std::vector<double>> alphas;
  for (int i = 0; i < coef.k; ++i) {
    auto row = coef.row(i);
    alphas.emplace_back(row.begin(), row.end());
  }
  nlohmann::json j;
  j["seed"] = run.config.seed;
  j["config"] = ToJson(run.config);
  j["components"] = run.interp->ComponentNames();
  j["coefficients"] = {{"alphas", Rows(alphas)},
                       {"intercepts", coef.intercepts},
                       {"fit_scores", coef.fit_scores}};
  j["ranks"] = {{"average_ranks", Rows(out.result.ranks.ToRows())},
                {"index_order", Rows(ToIndexOrder(out.result.ranks).ToRows())}};
  j["consensus"] = ToJson(out.report);
  j["absolute_ranking"] = out.absolute_ranking;
  if (coef.zero_mask_rows > 0) {
    out.warnings.push_back(std::to_string(coef.zero_mask_rows) +
                           " all-zero mask rows given cosine distance 1");
  }
  if (coef.rank_deficient_fits > 0) {
    out.warnings.push_back(std::to_string(coef.rank_deficient_fits) +
                           " rank-deficient fits solved by minimum norm");
  }
  j["warnings"] = out.warnings;
  out.report_json = std::move(j);

  const int m = run.interp->num_components();
  if (run.interp->modality() == Modality::kImage) {
    const Image& image = std::get<Image>(run.interp->original());
    const SegmentMap& seg = run.interp->segments();
    const std::vector<double> ranking(out.absolute_ranking.begin(),
                                      out.absolute_ranking.end());
    out.figures["ranking.svg"] = RenderImageOverlay(
        image, seg, ranking, "Absolute ranking of mean ranks (M = most important)",
        true, 1.0, m);
    out.figures["mean_rank.svg"] = RenderImageOverlay(
        image, seg, out.report.mean_ranks, "Mean rank", false, 1.0, m);
    out.figures["consensus.svg"] = RenderImageOverlay(
        image, seg, out.report.consensus, "Ordinal consensus C", false, 0.0, 1.0);
  } else {
    char title[160];
    std::snprintf(title, sizeof(title),
                  "Mean rank and consensus per token (K=%d, W=%.3f, kappa=%.3f)",
                  out.report.k_surrogates, out.report.kendall_w,
                  out.report.fleiss_kappa);
    out.figures["tokens.svg"] =
        RenderTokenTable(run.interp->ComponentNames(), out.report.mean_ranks,
                         out.report.consensus, title);
  }
  return out;
}

ExplainOutput CmdExplain(const RunConfig& config) {
  const PreparedRun run = PrepareRun(config);
  ExplainOutput out = ComputeExplain(run);
  EnsureDirectory(config.out_dir);
  WriteFileAtomic(JoinPath(config.out_dir, "report.json"),
                  out.report_json.dump(2) + "\n");
  for (const auto& [name, svg] : out.figures) {
    WriteFileAtomic(JoinPath(config.out_dir, name), svg);
  }
  return out;
}

std::string_view SweepParameterName(SweepParameter parameter) {
  return parameter == SweepParameter::kPerturbations ? "perturbations"
                                                     : "surrogates";
}

SweepParameter ParseSweepParameter(std::string_view text) {
  if (text == "perturbations") return SweepParameter::kPerturbations;
  if (text == "surrogates") return SweepParameter::kSurrogates;
  throw ConfigError("unknown sweep parameter '" + std::string(text) +
                    "' (expected perturbations or surrogates)");
}

SweepResult RunSweep(const PreparedRun& run, SweepParameter parameter,
                     const std::vector<int>& values, int replicates) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0 || (i > 0 && values[i] <= values[i - 1])) {
      throw ConfigError("sweep values must be ascending positive integers");
    }
  }
  if (replicates < 2) throw ConfigError("sweep needs at least 2 replicates");
  if (parameter == SweepParameter::kSurrogates && values.front() < 2) {
    throw ConfigError("surrogate counts must be >= 2");
  }
  if (parameter == SweepParameter::kPerturbations && values.front() < 2) {
    throw ConfigError("perturbation counts must be >= 2");
  }

  SweepResult sweep;
  sweep.parameter = parameter;
  sweep.values = values;
  sweep.replicates = replicates;
  sweep.m = run.interp->num_components();
  for (int value : values) {
    for (int r = 0; r < replicates; ++r) {
      BlimeConfig config = run.config.blime;
      if (parameter == SweepParameter::kPerturbations) {
        config.n_perturbations = value;
      } else {
        config.k_surrogates = value;
      }
      config.master_seed = DeriveSeed(run.config.seed, static_cast<uint64_t>(r));
      BlimeResult result =
          RunBlime(*run.interp, *run.predictor, run.config.explained_class, config);
      const ConsensusReport report = BuildReport(result.ranks);
      SweepRecord record;
      record.parameter_value = value;
      record.replicate = r;
      record.kendall_w = report.kendall_w;
      record.fleiss_kappa = report.fleiss_kappa;
      record.mean_ranks = report.mean_ranks;
      record.consensus = report.consensus;
      record.ranks = std::move(result.ranks);
      sweep.records.push_back(std::move(record));
    }
  }
  return sweep;
}

std::string SweepCsv(const SweepResult& sweep) {
  std::string out = "parameter_value,replicate,kendall_w,fleiss_kappa";
  for (int j = 1; j <= sweep.m; ++j) out += ",mean_rank_" + std::to_string(j);
  for (int j = 1; j <= sweep.m; ++j) out += ",consensus_" + std::to_string(j);
  out += '\n';
  for (const SweepRecord& rec : sweep.records) {
    out += std::to_string(rec.parameter_value) + "," +
           std::to_string(rec.replicate) + "," + Real(rec.kendall_w) + "," +
           Real(rec.fleiss_kappa);
    for (double v : rec.mean_ranks) out += "," + Real(v);
    for (double v : rec.consensus) out += "," + Real(v);
    out += '\n';
  }
  return out;
}

nlohmann::json SweepRanksJson(const SweepResult& sweep) {
  nlohmann::json records = nlohmann::json::array();
  for (const SweepRecord& rec : sweep.records) {
    records.push_back({{"parameter_value", rec.parameter_value},
                       {"replicate", rec.replicate},
                       {"ranks", Rows(rec.ranks.ToRows())}});
  }
  return {{"parameter", std::string(SweepParameterName(sweep.parameter))},
          {"tie_policy", "average"},
          {"records", std::move(records)}};
}

SweepResult CmdSweep(const RunConfig& config, SweepParameter parameter,
                     const std::vector<int>& values, int replicates,
                     bool dump_ranks) {
  const PreparedRun run = PrepareRun(config);
  SweepResult sweep = RunSweep(run, parameter, values, replicates);
  EnsureDirectory(config.out_dir);
  WriteFileAtomic(JoinPath(config.out_dir, "sweep.csv"), SweepCsv(sweep));
  if (dump_ranks) {
    WriteFileAtomic(JoinPath(config.out_dir, "ranks.json"),
                    SweepRanksJson(sweep).dump() + "\n");
  }
  return sweep;
}

std::string_view VariabilityModeName(VariabilityMode mode) {
  return mode == VariabilityMode::kSampling ? "sampling" : "predictive";
}

VariabilityMode ParseVariabilityMode(std::string_view text) {
  if (text == "sampling") return VariabilityMode::kSampling;
  if (text == "predictive") return VariabilityMode::kPredictive;
  throw ConfigError("unknown variability mode '" + std::string(text) +
                    "' (expected sampling or predictive)");
}

CoefficientEnsemble RunVariability(const PreparedRun& run, VariabilityMode mode) {
  BlimeConfig config = run.config.blime;
  if (mode == VariabilityMode::kSampling) {
    config.resampling = MaskResampling::kFresh;
    config.prediction_mode = MeanOfMembers{};
  } else {
    if (run.predictor->num_members() < 2) {
      throw ConfigError("predictive variability needs an ensemble of >= 2 members");
    }
    config.resampling = MaskResampling::kShared;
    config.prediction_mode = SampleMemberPerQuery{};
  }
  return RunBlime(*run.interp, *run.predictor, run.config.explained_class, config)
      .coefficients;
}

std::string VariabilityCsv(const CoefficientEnsemble& coefficients,
                           const std::vector<std::string>& names) {
  std::string out = "surrogate";
  for (const std::string& name : names) out += ",alpha_" + name;
  out += '\n';
  for (int i = 0; i < coefficients.k; ++i) {
    out += std::to_string(i);
    for (double v : coefficients.row(i)) out += "," + Real(v);
    out += '\n';
  }
  return out;
}

CoefficientEnsemble CmdVariability(const RunConfig& config, VariabilityMode mode) {
  const PreparedRun run = PrepareRun(config);
  CoefficientEnsemble coef = RunVariability(run, mode);
  const std::string csv = VariabilityCsv(coef, run.interp->ComponentNames());
  const std::string title =
      mode == VariabilityMode::kSampling
          ? "Coefficients over " + std::to_string(coef.k) +
                " fresh perturbation sets (ensemble mean)"
          : "Coefficients over " + std::to_string(coef.k) +
                " runs on one perturbation set (member sampled per query)";
  const std::string svg = RenderCsv(ParseCsv(csv), RenderKind::kViolins, title);
  EnsureDirectory(config.out_dir);
  const std::string stem = "variability_" + std::string(VariabilityModeName(mode));
  WriteFileAtomic(JoinPath(config.out_dir, stem + ".csv"), csv);
  WriteFileAtomic(JoinPath(config.out_dir, stem + ".svg"), svg);
  return coef;
}

size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw InputError("CSV has no column '" + std::string(name) + "'");
  }
  return static_cast<size_t>(it - header.begin());
}

CsvTable ParseCsv(std::string_view text) {
  CsvTable table;
  size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (table.header.empty()) {
      for (std::string_view c : cells) table.header.emplace_back(c);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InputError("CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(table.header.size()));
    }
    std::vector<double> row;
    for (std::string_view c : cells) {
      double v = 0;
      auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || end != c.data() + c.size()) {
        throw InputError("CSV line " + std::to_string(line_no) +
                         ": non-numeric cell '" + std::string(c) + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InputError("CSV is empty");
  return table;
}

RenderKind ParseRenderKind(std::string_view text) {
  if (text == "lines") return RenderKind::kLines;
  if (text == "violins") return RenderKind::kViolins;
  throw ConfigError("unknown render kind '" + std::string(text) +
                    "' (expected lines or violins)");
}

std::string RenderCsv(const CsvTable& table, RenderKind kind,
                      std::string_view title) {
  if (kind == RenderKind::kViolins) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> samples;
    for (size_t c = 0; c < table.header.size(); ++c) {
      const std::string& h = table.header[c];
      if (h.rfind("alpha_", 0) != 0) continue;
      names.push_back(h.substr(6));
      std::vector<double> column;
      for (const auto& row : table.rows) column.push_back(row[c]);
      samples.push_back(std::move(column));
    }
    if (names.empty()) throw InputError("CSV has no alpha_* columns");
    return RenderViolins(names, samples, "surrogate coefficient", title);
  }

  const size_t xcol = table.column("parameter_value");
  std::vector<size_t> rank_cols, cons_cols;
  for (int j = 1;; ++j) {
    auto r = std::find(table.header.begin(), table.header.end(),
                       "mean_rank_" + std::to_string(j));
    auto c = std::find(table.header.begin(), table.header.end(),
                       "consensus_" + std::to_string(j));
    if (r == table.header.end() || c == table.header.end()) break;
    rank_cols.push_back(static_cast<size_t>(r - table.header.begin()));
    cons_cols.push_back(static_cast<size_t>(c - table.header.begin()));
  }
  if (rank_cols.empty()) {
    throw InputError("CSV has no mean_rank_j / consensus_j columns");
  }
  std::vector<double> xs;
  for (const auto& row : table.rows) {
    if (std::find(xs.begin(), xs.end(), row[xcol]) == xs.end()) {
      xs.push_back(row[xcol]);
    }
  }
  std::sort(xs.begin(), xs.end());
  auto average = [&](size_t col) {
    std::vector<double> sums(xs.size(), 0.0), counts(xs.size(), 0.0);
    for (const auto& row : table.rows) {
      const size_t i = static_cast<size_t>(
          std::find(xs.begin(), xs.end(), row[xcol]) - xs.begin());
      sums[i] += row[col];
      counts[i] += 1.0;
    }
    for (size_t i = 0; i < xs.size(); ++i) sums[i] /= counts[i];
    return sums;
  };
  std::vector<LineSeries> top, bottom;
  for (size_t j = 0; j < rank_cols.size(); ++j) {
    const std::string name = "s" + std::to_string(j + 1);
    top.push_back({name, average(rank_cols[j])});
    bottom.push_back({name, average(cons_cols[j])});
  }
  return RenderLinePanels(xs, "swept parameter value", top, "mean rank", bottom,
                          "ordinal consensus C", title);
}

void CmdRender(const std::string& csv_path, RenderKind kind,
               const std::string& out_path) {
  const CsvTable table = ParseCsv(ReadTextFile(csv_path));
  const std::string title = kind == RenderKind::kLines
                                ? "Mean rank and consensus vs. swept parameter"
                                : "Distribution of surrogate coefficients";
  const std::string svg = RenderCsv(table, kind, title);
  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) EnsureDirectory(parent.string());
  WriteFileAtomic(out_path, svg);
}

}  // namespace blime
