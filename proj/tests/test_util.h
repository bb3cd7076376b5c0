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

#ifndef BLIME_TESTS_TEST_UTIL_H_
#define BLIME_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "blime/blime.h"
#include "blime/instance.h"
#include "blime/interpretable.h"
#include "blime/predictor.h"
#include "blime/rng.h"

namespace blime::testing {

inline std::string SourcePath(const std::string& relative) {
  return std::string(BLIME_SOURCE_DIR) + "/" + relative;
}

// RGB image with per-pixel noise, so no superpixel is uniform in colour.
inline Image TexturedImage(int width, int height, uint64_t seed = 1) {
  Image image(width, height, 3);
  Rng rng(seed);
  for (uint8_t& v : image.pixels) v = static_cast<uint8_t>(rng.UniformIndex(256));
  return image;
}

// Planted-weight setup on a 16x16 textured image with a 2x4 grid (M = 8).
// Component 6 is the dominant positive weight, component 2 the most negative.
inline const std::vector<double>& PlantedBeta() {
  static const std::vector<double> beta = {0.4, -0.3, -2.5, 0.8,
                                           0.2, -0.6, 3.0,  1.2};
  return beta;
}
inline constexpr int kPlantedTop = 6;
inline constexpr int kPlantedBottom = 2;

struct PlantedSetup {
  std::shared_ptr<const InterpretableInstance> interp;
  std::shared_ptr<const SyntheticEnsemble> predictor;
};

inline PlantedSetup MakePlanted(double noise_scale, int members = 5,
                                uint64_t predictor_seed = 11) {
  Image image = TexturedImage(16, 16, 3);
  SegmentMap seg = GridSegment(image, 2, 4);
  PlantedSetup setup;
  setup.interp = std::make_shared<InterpretableInstance>(
      InterpretableInstance::ForImage(std::move(image), std::move(seg)));
  SyntheticEnsembleSpec spec;
  spec.member_count = members;
  spec.base_weights = PlantedBeta();
  spec.member_noise_scale = noise_scale;
  spec.seed = predictor_seed;
  setup.predictor = std::make_shared<SyntheticEnsemble>(spec, setup.interp);
  return setup;
}

// ---- Independent oracles (never call the code under test). ----

// Dense Gauss-Jordan elimination with partial pivoting; solves A x = b.
inline std::vector<double> GaussSolve(std::vector<std::vector<double>> a,
                                      std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

// Weighted ridge via the augmented normal equations [Z 1]^T W [Z 1] + diag
// (lambda, ..., lambda, 0), assembled entry by entry. Returns alpha followed
// by the intercept.
inline std::vector<double> RidgeOracle(const std::vector<std::vector<double>>& z,
                                       const std::vector<double>& y,
                                       const std::vector<double>& w,
                                       double lambda) {
  const size_t n = y.size();
  const size_t m = z.front().size();
  const size_t d = m + 1;
  auto feature = [&](size_t i, size_t j) { return j < m ? z[i][j] : 1.0; };
  std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < d; ++c) {
      for (size_t i = 0; i < n; ++i) a[r][c] += w[i] * feature(i, r) * feature(i, c);
    }
    for (size_t i = 0; i < n; ++i) b[r] += w[i] * feature(i, r) * y[i];
    if (r < m) a[r][r] += lambda;
  }
  return GaussSolve(a, b);
}

// Kendall's W for tie-free rankings through the mean pairwise Spearman
// correlation: W = ((K - 1) * mean_rho + 1) / K.
inline double KendallWViaSpearman(const std::vector<std::vector<double>>& rows) {
  const size_t k = rows.size();
  const double m = static_cast<double>(rows.front().size());
  double rho_sum = 0.0;
  int pairs = 0;
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = a + 1; b < k; ++b) {
      double d2 = 0.0;
      for (size_t j = 0; j < rows[a].size(); ++j) {
        d2 += (rows[a][j] - rows[b][j]) * (rows[a][j] - rows[b][j]);
      }
      rho_sum += 1.0 - 6.0 * d2 / (m * (m * m - 1.0));
      ++pairs;
    }
  }
  return ((k - 1.0) * (rho_sum / pairs) + 1.0) / k;
}

// Random permutation of 1..m as doubles (Fisher-Yates).
inline std::vector<double> RandomPermutation(int m, Rng& rng) {
  std::vector<double> row(m);
  for (int i = 0; i < m; ++i) row[i] = i + 1;
  for (int i = m - 1; i > 0; --i) {
    std::swap(row[i], row[rng.UniformIndex(i + 1)]);
  }
  return row;
}

inline double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double StdDev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

inline double Variance(const std::vector<double>& v) {
  const double s = StdDev(v);
  return s * s;
}

}  // namespace blime::testing

#endif  // BLIME_TESTS_TEST_UTIL_H_
