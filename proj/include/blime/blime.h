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

#ifndef BLIME_BLIME_H_
#define BLIME_BLIME_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blime/interpretable.h"
#include "blime/predictor.h"
#include "blime/surrogate.h"

namespace blime {

// How the K perturbation sets relate to each other.
enum class MaskResampling {
  kFresh,   // an independent mask set per surrogate
  kShared,  // the mask set of surrogate 0 is reused by every surrogate
  kPool,    // rows resampled with replacement from one shared pool
};

// "true" (fresh), "false" (shared) or "pool".
std::string FormatMaskResampling(MaskResampling resampling);
MaskResampling ParseMaskResampling(std::string_view text);

struct BlimeConfig {
  int k_surrogates = 100;
  int n_perturbations = 100;
  MaskResampling resampling = MaskResampling::kFresh;
  PredictionMode prediction_mode = MeanOfMembers{};
  uint64_t master_seed = 0;
  KernelConfig kernel;
  SurrogateConfig surrogate;
  // Execution only; results do not depend on it.
  int workers = 1;
};

// K x M coefficients, one row per surrogate.
struct CoefficientEnsemble {
  int k = 0;
  int m = 0;
  std::vector<double> alphas;  // row-major
  std::vector<double> intercepts;
  std::vector<double> fit_scores;
  int zero_mask_rows = 0;       // summed over surrogates
  int rank_deficient_fits = 0;  // fits solved by the minimum-norm path

  std::span<const double> row(int i) const {
    return {alphas.data() + static_cast<size_t>(i) * m, static_cast<size_t>(m)};
  }
};

enum class TiePolicy { kAverageRanks, kIndexOrder };

// K x M ranks; row k ranks the components by surrogate k's coefficients,
// smallest coefficient = rank 1. Every row sums to M(M+1)/2.
struct RankingMatrix {
  int k = 0;
  int m = 0;
  std::vector<double> ranks;  // row-major
  TiePolicy tie_policy = TiePolicy::kAverageRanks;

  double at(int row, int col) const {
    return ranks[static_cast<size_t>(row) * m + col];
  }
  std::span<const double> row(int i) const {
    return {ranks.data() + static_cast<size_t>(i) * m, static_cast<size_t>(m)};
  }

  // Builds from nested rows; throws InputError on ragged input.
  static RankingMatrix FromRows(const std::vector<std::vector<double>>& rows,
                                TiePolicy policy);
  std::vector<std::vector<double>> ToRows() const;
};

// Ranks one coefficient vector. Throws InputError on non-finite entries.
std::vector<double> RankCoefficients(std::span<const double> alpha,
                                     TiePolicy tie_policy);

RankingMatrix RankEnsemble(const CoefficientEnsemble& ensemble,
                           TiePolicy tie_policy);

// Integer re-ranking of `ranks`: equal values are ordered by ascending
// component index. Applied to an AverageRanks matrix this yields exactly the
// IndexOrder ranking of the underlying coefficients.
RankingMatrix ToIndexOrder(const RankingMatrix& ranks);

struct BlimeResult {
  CoefficientEnsemble coefficients;
  RankingMatrix ranks;  // AverageRanks
};

// Derives K surrogates. Surrogate k uses the streams
//   masks:       DeriveSeed(DeriveSeed(master_seed, k), 0)
//   predictions: DeriveSeed(DeriveSeed(master_seed, k), 1)
// (shared/pool mask sets come from surrogate 0's / a dedicated pool stream),
// so the result is bit-reproducible for any worker count.
BlimeResult RunBlime(const InterpretableInstance& interp,
                     const Predictor& predictor, int explained_class,
                     const BlimeConfig& config);

}  // namespace blime

#endif  // BLIME_BLIME_H_
