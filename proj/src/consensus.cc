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

#include "blime/consensus.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "blime/error.h"

namespace blime {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void Add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void RequireRaters(const RankingMatrix& ranks, const char* what) {
  if (ranks.k < 2 || ranks.m < 2) {
    throw InputError(std::string(what) + " needs K >= 2 and M >= 2, got K=" +
                     std::to_string(ranks.k) + ", M=" +
                     std::to_string(ranks.m));
  }
}

std::vector<double> ColumnSums(const RankingMatrix& ranks) {
  std::vector<CompensatedSum> sums(ranks.m);
  for (int i = 0; i < ranks.k; ++i) {
    for (int j = 0; j < ranks.m; ++j) sums[j].Add(ranks.at(i, j));
  }
  std::vector<double> out(ranks.m);
  for (int j = 0; j < ranks.m; ++j) out[j] = sums[j].value();
  return out;
}

// Integer category (1..M) of every cell of an IndexOrder matrix.
std::vector<int> Categories(const RankingMatrix& ranks) {
  const RankingMatrix integer = ToIndexOrder(ranks);
  std::vector<int> out(integer.ranks.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = integer.ranks[i];
    const int c = static_cast<int>(v);
    if (c != v || c < 1 || c > ranks.m) {
      throw InputError("rank " + std::to_string(v) + " outside 1.." +
                       std::to_string(ranks.m));
    }
    out[i] = c;
  }
  return out;
}

}  // namespace

std::vector<double> MeanRanks(const RankingMatrix& ranks) {
  if (ranks.k < 1) throw InputError("mean ranks need at least one row");
  std::vector<double> means = ColumnSums(ranks);
  for (double& v : means) v /= ranks.k;
  return means;
}

double OrdinalConsensus(const RankingMatrix& ranks, int j) {
  if (j < 0 || j >= ranks.m) {
    throw InputError("component " + std::to_string(j) + " out of range");
  }
  if (ranks.m == 1) return 1.0;
  if (ranks.k < 1) throw InputError("consensus needs at least one row");

  const std::vector<int> categories = Categories(ranks);
  std::vector<int> counts(ranks.m + 1, 0);
  double mu = 0.0;
  for (int i = 0; i < ranks.k; ++i) {
    const int v = categories[static_cast<size_t>(i) * ranks.m + j];
    ++counts[v];
    mu += v;
  }
  mu /= ranks.k;
  const double width = ranks.m - 1;
  double c = 1.0;
  for (int v = 1; v <= ranks.m; ++v) {
    if (counts[v] == 0) continue;
    const double p = static_cast<double>(counts[v]) / ranks.k;
    c += p * std::log2(1.0 - std::abs(v - mu) / width);
  }
  return std::clamp(c, 0.0, 1.0);
}

double FleissKappa(const RankingMatrix& ranks) {
  RequireRaters(ranks, "Fleiss' kappa");
  const int k = ranks.k;
  const int m = ranks.m;
  const std::vector<int> categories = Categories(ranks);

  // counts[j][v]: raters assigning rank v to component j.
  std::vector<std::vector<int>> counts(m, std::vector<int>(m + 1, 0));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      ++counts[j][categories[static_cast<size_t>(i) * m + j]];
    }
  }
  // Integer sums keep the result independent of component and rater order.
  std::vector<int64_t> category_total(m + 1, 0);
  int64_t squares = 0;
  for (int j = 0; j < m; ++j) {
    for (int v = 1; v <= m; ++v) {
      squares += static_cast<int64_t>(counts[j][v]) * counts[j][v];
      category_total[v] += counts[j][v];
    }
  }
  const double mk = static_cast<double>(m) * k;
  const double observed =
      static_cast<double>(squares - static_cast<int64_t>(m) * k) / (mk * (k - 1));
  int64_t total_squares = 0;
  for (int v = 1; v <= m; ++v) total_squares += category_total[v] * category_total[v];
  const double expected = static_cast<double>(total_squares) / (mk * mk);
  if (1.0 - expected < 1e-12) {
    if (observed > 1.0 - 1e-12) return 1.0;
    throw InputError("degenerate category distribution for Fleiss' kappa");
  }
  return (observed - expected) / (1.0 - expected);
}

KendallWResult KendallW(const RankingMatrix& ranks) {
  RequireRaters(ranks, "Kendall's W");
  const double k = ranks.k;
  const double m = ranks.m;
  const std::vector<double> sums = ColumnSums(ranks);
  const double expected = k * (m + 1.0) / 2.0;
  double s = 0.0;
  for (double r : sums) s += (r - expected) * (r - expected);

  double tie_total = 0.0;
  std::vector<double> sorted;
  for (int i = 0; i < ranks.k; ++i) {
    auto row = ranks.row(i);
    sorted.assign(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    size_t start = 0;
    while (start < sorted.size()) {
      size_t end = start + 1;
      while (end < sorted.size() && sorted[end] == sorted[start]) ++end;
      const double t = static_cast<double>(end - start);
      tie_total += t * t * t - t;
      start = end;
    }
  }
  const double denominator = k * k * (m * m * m - m) - k * tie_total;
  if (denominator <= 0.0) return {0.0, true};
  return {12.0 * s / denominator, false};
}

ConsensusReport BuildReport(const RankingMatrix& ranks) {
  RequireRaters(ranks, "consensus report");
  ConsensusReport report;
  report.k_surrogates = ranks.k;
  report.m_components = ranks.m;
  report.mean_ranks = MeanRanks(ranks);
  report.consensus.resize(ranks.m);
  for (int j = 0; j < ranks.m; ++j) {
    report.consensus[j] = OrdinalConsensus(ranks, j);
  }
  report.fleiss_kappa = FleissKappa(ranks);
  const KendallWResult w = KendallW(ranks);
  report.kendall_w = w.w;
  report.kendall_w_degenerate = w.degenerate;
  return report;
}

nlohmann::json ToJson(const ConsensusReport& report) {
  return {{"mean_ranks", report.mean_ranks},
          {"consensus", report.consensus},
          {"fleiss_kappa", report.fleiss_kappa},
          {"kendall_w", report.kendall_w},
          {"k", report.k_surrogates},
          {"m", report.m_components},
          {"rank_convention", report.rank_convention}};
}

std::vector<int> AbsoluteRanking(const std::vector<double>& mean_ranks) {
  const std::vector<double> ranks =
      RankCoefficients(mean_ranks, TiePolicy::kIndexOrder);
  return std::vector<int>(ranks.begin(), ranks.end());
}

}  // namespace blime
