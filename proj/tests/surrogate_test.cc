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

#include "blime/surrogate.h"

#include <cmath>
#include <limits>
#include <vector>

#include "blime/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace blime {
namespace {

using ::blime::testing::MakePlanted;
using ::blime::testing::RidgeOracle;

Eigen::MatrixXd Design(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd z(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) z(i, j) = rows[i][j];
  }
  return z;
}

SurrogateConfig Lambda(double lambda) {
  SurrogateConfig config;
  config.ridge_lambda = lambda;
  return config;
}

TEST(SampleMasks, IncludeOriginalPutsOnesFirst) {
  Rng rng(1);
  const MaskMatrix masks = SampleMasks(10, 5, SurrogateConfig{}, rng);
  EXPECT_EQ(masks.rows(), 10);
  for (int j = 0; j < 5; ++j) EXPECT_EQ(masks(0, j), 1);
}

TEST(SampleMasks, NearOneActivationGivesFullRows) {
  SurrogateConfig config;
  config.activation_prob = 0.999999;
  config.include_original = false;
  Rng rng(2);
  const MaskMatrix masks = SampleMasks(100, 8, config, rng);
  int ones = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 8; ++j) ones += masks(i, j);
  }
  EXPECT_GE(ones, 799);
}

TEST(SampleMasks, ColumnMeansConcentrate) {
  SurrogateConfig config;
  config.include_original = false;
  Rng rng(3);
  const MaskMatrix masks = SampleMasks(200, 8, config, rng);
  for (int j = 0; j < 8; ++j) {
    double mean = 0.0;
    for (int i = 0; i < 200; ++i) mean += masks(i, j);
    mean /= 200;
    EXPECT_GT(mean, 0.35);
    EXPECT_LT(mean, 0.65);
  }
}

TEST(SampleMasks, DeterministicAndValidated) {
  Rng a(4), b(4);
  EXPECT_EQ(SampleMasks(20, 6, SurrogateConfig{}, a),
            SampleMasks(20, 6, SurrogateConfig{}, b));
  EXPECT_THROW(SampleMasks(1, 6, SurrogateConfig{}, a), InputError);
  EXPECT_THROW(SampleMasks(5, 1, SurrogateConfig{}, a), InputError);
}

TEST(KernelWeights, Examples) {
  MaskMatrix masks(3, 4);
  for (int j = 0; j < 4; ++j) masks(0, j) = 1;
  masks(1, 0) = masks(1, 1) = 1;
  int zero_rows = 0;
  const std::vector<double> w = KernelWeights(masks, KernelConfig{0.25}, &zero_rows);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], 0.25345144771897427, 1e-15);
  EXPECT_NEAR(w[1], 0.2535, 1e-4);
  EXPECT_NEAR(w[2], std::exp(-16.0), 1e-20);
  EXPECT_EQ(zero_rows, 1);

  const std::vector<double> flat = KernelWeights(masks, KernelConfig{1e9});
  for (double v : flat) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_THROW(KernelWeights(masks, KernelConfig{0.0}), Error);
}

TEST(FitWeightedRidge, ZeroTargets) {
  const Eigen::MatrixXd z = Design({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<double> y(3, 0.0), w = {1, 0.5, 2};
  for (double lambda : {0.0, 1.0}) {
    const SurrogateCoefficients c = FitWeightedRidge(z, y, w, Lambda(lambda));
    EXPECT_EQ(c.alpha, (std::vector<double>{0, 0}));
    EXPECT_EQ(c.intercept, 0.0);
    EXPECT_EQ(c.weighted_r2, 1.0);
  }
}

TEST(FitWeightedRidge, TwoPointExamples) {
  const Eigen::MatrixXd z = Design({{0}, {1}});
  const std::vector<double> y = {0, 1}, w = {1, 1};
  const SurrogateCoefficients exact = FitWeightedRidge(z, y, w, Lambda(0));
  EXPECT_NEAR(exact.alpha[0], 1.0, 1e-12);
  EXPECT_NEAR(exact.intercept, 0.0, 1e-12);
  EXPECT_NEAR(exact.weighted_r2, 1.0, 1e-12);
  const SurrogateCoefficients ridge = FitWeightedRidge(z, y, w, Lambda(1));
  EXPECT_NEAR(ridge.alpha[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(ridge.intercept, 1.0 / 3.0, 1e-12);
}

TEST(FitWeightedRidge, MatchesNormalEquationOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.UniformIndex(10));
    const int n = m + 2 + static_cast<int>(rng.UniformIndex(50 - m - 1));
    const double lambda = std::vector<double>{0.0, 0.1, 1.0}[trial % 3];
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    std::vector<double> y(n), w(n);
    for (int i = 0; i < n; ++i) {
      for (double& v : rows[i]) v = rng.Bernoulli(0.5);
      y[i] = rng.NextDouble();
      w[i] = 0.05 + rng.NextDouble();
    }
    const Eigen::MatrixXd z = Design(rows);
    const SurrogateCoefficients c = FitWeightedRidge(z, y, w, Lambda(lambda));
    if (c.rank_deficient) continue;  // covered by the min-norm test below
    const std::vector<double> oracle = RidgeOracle(rows, y, w, lambda);
    for (int j = 0; j < m; ++j) EXPECT_NEAR(c.alpha[j], oracle[j], 1e-8);
    EXPECT_NEAR(c.intercept, oracle[m], 1e-8);
  }
}

TEST(FitWeightedRidge, WeightScaleInvarianceAtZeroLambda) {
  Rng rng(5);
  std::vector<std::vector<double>> rows(30, std::vector<double>(4));
  std::vector<double> y(30), w(30), w_scaled(30);
  for (int i = 0; i < 30; ++i) {
    for (double& v : rows[i]) v = rng.Bernoulli(0.5);
    y[i] = rng.NextDouble();
    w[i] = 0.1 + rng.NextDouble();
    w_scaled[i] = 7.5 * w[i];
  }
  const Eigen::MatrixXd z = Design(rows);
  const SurrogateCoefficients a = FitWeightedRidge(z, y, w, Lambda(0));
  const SurrogateCoefficients b = FitWeightedRidge(z, y, w_scaled, Lambda(0));
  ASSERT_FALSE(a.rank_deficient);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(a.alpha[j], b.alpha[j], 1e-9);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-9);

  // With lambda > 0, scaling weights and lambda together is invariant.
  const SurrogateCoefficients c = FitWeightedRidge(z, y, w, Lambda(0.5));
  const SurrogateCoefficients d = FitWeightedRidge(z, y, w_scaled, Lambda(3.75));
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(c.alpha[j], d.alpha[j], 1e-9);
  EXPECT_NEAR(c.intercept, d.intercept, 1e-9);
}

TEST(FitWeightedRidge, RowDuplicationInvarianceAtZeroLambda) {
  Rng rng(6);
  std::vector<std::vector<double>> rows(25, std::vector<double>(5));
  std::vector<double> y(25), w(25);
  for (int i = 0; i < 25; ++i) {
    for (double& v : rows[i]) v = rng.Bernoulli(0.5);
    y[i] = rng.NextDouble();
    w[i] = 0.1 + rng.NextDouble();
  }
  std::vector<std::vector<double>> rows2 = rows;
  rows2.insert(rows2.end(), rows.begin(), rows.end());
  std::vector<double> y2 = y, w2 = w;
  y2.insert(y2.end(), y.begin(), y.end());
  w2.insert(w2.end(), w.begin(), w.end());
  const SurrogateCoefficients a = FitWeightedRidge(Design(rows), y, w, Lambda(0));
  const SurrogateCoefficients b = FitWeightedRidge(Design(rows2), y2, w2, Lambda(0));
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(a.alpha[j], b.alpha[j], 1e-9);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-9);
}

TEST(FitWeightedRidge, RankDeficientUsesMinimumNorm) {
  // Columns 0 and 1 are identical: y = z0 + b has the min-norm split
  // alpha0 = alpha1 = 0.5.
  const Eigen::MatrixXd z = Design({{0, 0, 1}, {1, 1, 0}, {1, 1, 1}, {0, 0, 0}});
  const std::vector<double> y = {0.2, 1.0, 1.2, 0.0}, w = {1, 1, 1, 1};
  const SurrogateCoefficients c = FitWeightedRidge(z, y, w, Lambda(0));
  EXPECT_TRUE(c.rank_deficient);
  EXPECT_NEAR(c.alpha[0], 0.5, 1e-10);
  EXPECT_NEAR(c.alpha[1], 0.5, 1e-10);
  EXPECT_NEAR(c.alpha[2], 0.2, 1e-10);
  EXPECT_NEAR(c.intercept, 0.0, 1e-10);
  EXPECT_FALSE(FitWeightedRidge(z, y, w, Lambda(0.1)).rank_deficient);
}

TEST(FitWeightedRidge, RejectsBadInput) {
  const Eigen::MatrixXd z = Design({{0}, {1}});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(FitWeightedRidge(z, std::vector<double>{0, nan},
                                std::vector<double>{1, 1}, Lambda(1)),
               InputError);
  EXPECT_THROW(FitWeightedRidge(z, std::vector<double>{0, 1},
                                std::vector<double>{0, 0}, Lambda(1)),
               InputError);
  EXPECT_THROW(FitWeightedRidge(z, std::vector<double>{0, 1},
                                std::vector<double>{1, -1}, Lambda(1)),
               InputError);
  EXPECT_THROW(FitWeightedRidge(z, std::vector<double>{0, 1},
                                std::vector<double>{1, 1}, Lambda(-1)),
               Error);
}

TEST(BuildPerturbationSet, InvariantsHold) {
  auto planted = MakePlanted(0.2);
  Rng rng(9);
  const PerturbationSet set = BuildPerturbationSet(
      *planted.interp, *planted.predictor, 1, MeanOfMembers{}, 60,
      SurrogateConfig{}, KernelConfig{}, rng);
  ASSERT_EQ(set.masks.rows(), 60);
  ASSERT_EQ(set.targets.size(), 60u);
  EXPECT_EQ(set.weights[0], 1.0);
  for (int i = 0; i < 60; ++i) {
    EXPECT_GT(set.weights[i], 0.0);
    EXPECT_LE(set.weights[i], 1.0);
    EXPECT_GE(set.targets[i], 0.0);
    EXPECT_LE(set.targets[i], 1.0);
  }
  const nlohmann::json j = ToJson(set);
  EXPECT_EQ(j["masks"].size(), 60u);
  EXPECT_EQ(j["targets"].size(), 60u);
  EXPECT_EQ(j["weights"].size(), 60u);

  Rng bad(1);
  EXPECT_THROW(BuildPerturbationSet(*planted.interp, *planted.predictor, 2,
                                    MeanOfMembers{}, 10, SurrogateConfig{},
                                    KernelConfig{}, bad),
               Error);
}

TEST(FitSurrogate, RecoversPlantedOrdering) {
  auto planted = MakePlanted(0.0);
  Rng rng(10);
  const PerturbationSet set = BuildPerturbationSet(
      *planted.interp, *planted.predictor, 1, MeanOfMembers{}, 300,
      SurrogateConfig{}, KernelConfig{}, rng);
  const SurrogateCoefficients c = FitSurrogate(set, SurrogateConfig{});
  const auto top = std::max_element(c.alpha.begin(), c.alpha.end()) - c.alpha.begin();
  const auto bottom = std::min_element(c.alpha.begin(), c.alpha.end()) - c.alpha.begin();
  EXPECT_EQ(top, testing::kPlantedTop);
  EXPECT_EQ(bottom, testing::kPlantedBottom);
  EXPECT_GT(c.weighted_r2, 0.5);
}

}  // namespace
}  // namespace blime
