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

#include "blime/blime.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "blime/error.h"
#include "blime/parallel.h"

namespace blime {

namespace {

constexpr uint64_t kMaskStream = 0;
constexpr uint64_t kPredictionStream = 1;
constexpr uint64_t kPoolStream = ~uint64_t{0};

// Component indices sorted by value, ties by ascending index.
std::vector<int> StableOrder(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  return order;
}

// Rethrows the active library error with the surrogate index prefixed,
// keeping its type.
[[noreturn]] void RethrowWithSurrogate(int k) {
  const std::string prefix = "surrogate " + std::to_string(k + 1) + ": ";
  try {
    throw;
  } catch (const ProtocolError& e) {
    throw ProtocolError(prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  }
}

}  // namespace

std::string FormatMaskResampling(MaskResampling resampling) {
  switch (resampling) {
    case MaskResampling::kFresh:
      return "true";
    case MaskResampling::kShared:
      return "false";
    case MaskResampling::kPool:
      return "pool";
  }
  return "true";
}

MaskResampling ParseMaskResampling(std::string_view text) {
  if (text == "true" || text == "fresh") return MaskResampling::kFresh;
  if (text == "false" || text == "shared") return MaskResampling::kShared;
  if (text == "pool") return MaskResampling::kPool;
  throw InputError("unknown resample_masks value '" + std::string(text) +
                   "' (expected true, false or pool)");
}

RankingMatrix RankingMatrix::FromRows(
    const std::vector<std::vector<double>>& rows, TiePolicy policy) {
  RankingMatrix out;
  out.k = static_cast<int>(rows.size());
  out.m = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  out.tie_policy = policy;
  for (const auto& row : rows) {
    if (row.size() != static_cast<size_t>(out.m)) {
      throw InputError("ranking matrix rows have different lengths");
    }
    out.ranks.insert(out.ranks.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<std::vector<double>> RankingMatrix::ToRows() const {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < k; ++i) {
    auto r = row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

std::vector<double> RankCoefficients(std::span<const double> alpha,
                                     TiePolicy tie_policy) {
  for (double v : alpha) {
    if (!std::isfinite(v)) throw InputError("non-finite coefficient");
  }
  const std::vector<int> order = StableOrder(alpha);
  std::vector<double> ranks(alpha.size());
  if (tie_policy == TiePolicy::kIndexOrder) {
    for (size_t pos = 0; pos < order.size(); ++pos) {
      ranks[order[pos]] = static_cast<double>(pos + 1);
    }
    return ranks;
  }
  size_t start = 0;
  while (start < order.size()) {
    size_t end = start + 1;
    while (end < order.size() && alpha[order[end]] == alpha[order[start]]) {
      ++end;
    }
    // Positions start..end-1 hold ranks start+1..end; their mean.
    const double rank = (static_cast<double>(start + 1) + end) / 2.0;
    for (size_t pos = start; pos < end; ++pos) ranks[order[pos]] = rank;
    start = end;
  }
  return ranks;
}

RankingMatrix RankEnsemble(const CoefficientEnsemble& ensemble,
                           TiePolicy tie_policy) {
  RankingMatrix out;
  out.k = ensemble.k;
  out.m = ensemble.m;
  out.tie_policy = tie_policy;
  out.ranks.reserve(ensemble.alphas.size());
  for (int i = 0; i < ensemble.k; ++i) {
    const std::vector<double> row = RankCoefficients(ensemble.row(i), tie_policy);
    out.ranks.insert(out.ranks.end(), row.begin(), row.end());
  }
  return out;
}

RankingMatrix ToIndexOrder(const RankingMatrix& ranks) {
  RankingMatrix out = ranks;
  out.tie_policy = TiePolicy::kIndexOrder;
  if (ranks.tie_policy == TiePolicy::kIndexOrder) return out;
  for (int i = 0; i < ranks.k; ++i) {
    const std::vector<int> order = StableOrder(ranks.row(i));
    for (size_t pos = 0; pos < order.size(); ++pos) {
      out.ranks[static_cast<size_t>(i) * ranks.m + order[pos]] =
          static_cast<double>(pos + 1);
    }
  }
  return out;
}

BlimeResult RunBlime(const InterpretableInstance& interp,
                     const Predictor& predictor, int explained_class,
                     const BlimeConfig& config) {
  const int m = interp.num_components();
  const int k = config.k_surrogates;
  const int n = config.n_perturbations;
  if (m < 2) throw InputError("need at least 2 components");
  if (k < 1) throw InputError("k_surrogates must be positive");
  if (n < 2) throw InputError("n_perturbations must be at least 2");
  if (predictor.modality() != interp.modality()) {
    throw InputError("predictor modality does not match the instance");
  }
  ValidatePredictionMode(predictor, config.prediction_mode);
  if (explained_class < 0 || explained_class >= predictor.num_classes()) {
    throw InputError("explained class " + std::to_string(explained_class) +
                     " out of range for " +
                     std::to_string(predictor.num_classes()) + " classes");
  }

  std::optional<MaskMatrix> shared;
  if (config.resampling == MaskResampling::kShared) {
    Rng rng(DeriveSeed(DeriveSeed(config.master_seed, 0), kMaskStream));
    shared = SampleMasks(n, m, config.surrogate, rng);
  } else if (config.resampling == MaskResampling::kPool) {
    Rng rng(DeriveSeed(config.master_seed, kPoolStream));
    shared = SampleMasks(n, m, config.surrogate, rng);
  }

  BlimeResult result;
  CoefficientEnsemble& coef = result.coefficients;
  coef.k = k;
  coef.m = m;
  coef.alphas.assign(static_cast<size_t>(k) * m, 0.0);
  coef.intercepts.assign(k, 0.0);
  coef.fit_scores.assign(k, 0.0);
  std::vector<int> zero_rows(k, 0);
  std::vector<uint8_t> deficient(k, 0);

  ParallelFor(k, config.workers, [&](int s) {
    try {
      const uint64_t surrogate_seed = DeriveSeed(config.master_seed, s);
      Rng mask_rng(DeriveSeed(surrogate_seed, kMaskStream));
      Rng prediction_rng(DeriveSeed(surrogate_seed, kPredictionStream));

      MaskMatrix masks;
      switch (config.resampling) {
        case MaskResampling::kFresh:
          masks = SampleMasks(n, m, config.surrogate, mask_rng);
          break;
        case MaskResampling::kShared:
          masks = *shared;
          break;
        case MaskResampling::kPool: {
          masks = MaskMatrix(n, m);
          const int first = config.surrogate.include_original ? 1 : 0;
          if (first == 1) {
            for (uint8_t& v : masks.row(0)) v = 1;
          }
          for (int i = first; i < n; ++i) {
            const int src = static_cast<int>(mask_rng.UniformIndex(n));
            std::copy(shared->row(src).begin(), shared->row(src).end(),
                      masks.row(i).begin());
          }
          break;
        }
      }

      const PerturbationSet set = BuildPerturbationSet(
          interp, predictor, explained_class, config.prediction_mode,
          std::move(masks), config.kernel, prediction_rng);
      const SurrogateCoefficients fit = FitSurrogate(set, config.surrogate);
      std::copy(fit.alpha.begin(), fit.alpha.end(),
                coef.alphas.begin() + static_cast<ptrdiff_t>(s) * m);
      coef.intercepts[s] = fit.intercept;
      coef.fit_scores[s] = fit.weighted_r2;
      zero_rows[s] = set.zero_mask_rows;
      deficient[s] = fit.rank_deficient;
    } catch (const Error& e) {
      if (dynamic_cast<const ProtocolError*>(&e) ||
          dynamic_cast<const InputError*>(&e)) {
        RethrowWithSurrogate(s);
      }
      throw;
    }
  });

  coef.zero_mask_rows = std::accumulate(zero_rows.begin(), zero_rows.end(), 0);
  coef.rank_deficient_fits = std::accumulate(deficient.begin(), deficient.end(), 0);
  result.ranks = RankEnsemble(coef, TiePolicy::kAverageRanks);
  return result;
}

}  // namespace blime
