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

#ifndef BLIME_CONSENSUS_H_
#define BLIME_CONSENSUS_H_

#include <string>
#include <vector>

#include "blime/blime.h"
#include "json.hpp"

namespace blime {

inline constexpr char kRankConvention[] =
    "rank 1 = smallest coefficient, rank M = largest coefficient; "
    "higher mean rank = more important";

// Column means of the ranking matrix (K >= 1).
std::vector<double> MeanRanks(const RankingMatrix& ranks);

// Ordinal consensus of component `j` over the rank scale {1..M}:
//   C = 1 + sum_v p_v log2(1 - |v - mu| / (M - 1))
// with p the distribution of the column's IndexOrder ranks and mu their mean.
// 1 = unanimity, ~0.5 = dispersed, 0 = polarized. Clamped to [0, 1].
double OrdinalConsensus(const RankingMatrix& ranks, int j);

// Fleiss' kappa with the M components as subjects, the K surrogates as raters
// and the ranks 1..M as categories (on the IndexOrder matrix).
// Throws InputError for K < 2, M < 2 or a degenerate category distribution.
double FleissKappa(const RankingMatrix& ranks);

struct KendallWResult {
  double w = 0.0;
  // All components tied in every row; w is reported as 0.
  bool degenerate = false;
};

// Kendall's W with tie correction, on the matrix as given (AverageRanks
// expected). Throws InputError for K < 2 or M < 2.
KendallWResult KendallW(const RankingMatrix& ranks);

struct ConsensusReport {
  std::vector<double> mean_ranks;
  std::vector<double> consensus;
  double fleiss_kappa = 0.0;
  double kendall_w = 0.0;
  bool kendall_w_degenerate = false;
  int k_surrogates = 0;
  int m_components = 0;
  std::string rank_convention = kRankConvention;
};

ConsensusReport BuildReport(const RankingMatrix& ranks);

// Fields: mean_ranks, consensus, fleiss_kappa, kendall_w, k, m,
// rank_convention.
nlohmann::json ToJson(const ConsensusReport& report);

// Ranks the mean ranks themselves (IndexOrder ties): the integer "absolute
// ranking" of the components, M = most important.
std::vector<int> AbsoluteRanking(const std::vector<double>& mean_ranks);

}  // namespace blime

#endif  // BLIME_CONSENSUS_H_
