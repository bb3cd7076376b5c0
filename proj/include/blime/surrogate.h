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

#ifndef BLIME_SURROGATE_H_
#define BLIME_SURROGATE_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "blime/interpretable.h"
#include "blime/predictor.h"
#include "blime/rng.h"
#include "json.hpp"

namespace blime {

// RBF locality kernel over the cosine distance between a mask and the
// all-ones mask.
struct KernelConfig {
  double width = 0.25;
};

inline constexpr double kDefaultImageKernelWidth = 0.25;
inline constexpr double kDefaultTextKernelWidth = 25.0;

struct SurrogateConfig {
  // Ridge penalty on the coefficients; the intercept is never penalized.
  double ridge_lambda = 1.0;
  bool fit_intercept = true;
  // Row 0 of every sampled mask set is the all-ones mask.
  bool include_original = true;
  double activation_prob = 0.5;
};

// Row-major binary N x M matrix.
class MaskMatrix {
 public:
  MaskMatrix() = default;
  MaskMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const uint8_t> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }
  std::span<uint8_t> row(int i) {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }
  uint8_t operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  uint8_t& operator()(int i, int j) {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  Eigen::MatrixXd ToDesign() const;

  friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<uint8_t> data_;
};

// One perturbation dataset: masks Z, explained-class probabilities of the
// reconstructed instances, and their kernel weights.
struct PerturbationSet {
  MaskMatrix masks;
  std::vector<double> targets;
  std::vector<double> weights;
  int zero_mask_rows = 0;  // all-zero masks, assigned the maximal distance
};

nlohmann::json ToJson(const PerturbationSet& set);

struct SurrogateCoefficients {
  std::vector<double> alpha;
  double intercept = 0.0;
  double weighted_r2 = 0.0;
  // Set when lambda = 0 and the centred design was rank deficient; alpha is
  // then the minimum-norm least-squares solution.
  bool rank_deficient = false;
};

// Draws n x m Bernoulli(activation_prob) masks row by row. With
// include_original, row 0 is overwritten by the all-ones mask.
MaskMatrix SampleMasks(int n, int m, const SurrogateConfig& config, Rng& rng);

// w_i = exp(-d_i^2 / width^2), d_i the cosine distance of row i to the
// all-ones mask. All-zero rows get d = 1; their count is written to
// `zero_rows` if non-null.
std::vector<double> KernelWeights(const MaskMatrix& masks,
                                  const KernelConfig& kernel,
                                  int* zero_rows = nullptr);

// Minimizes sum_i w_i (y_i - alpha . z_i - b)^2 + lambda |alpha|^2 with b
// unpenalized, by weighted centring and a Cholesky solve of the M x M normal
// equations. lambda = 0 with a rank-deficient design falls back to a
// complete orthogonal decomposition (minimum-norm solution).
SurrogateCoefficients FitWeightedRidge(const Eigen::MatrixXd& design,
                                       std::span<const double> targets,
                                       std::span<const double> weights,
                                       const SurrogateConfig& config);

// Reconstructs every masked instance, queries the predictor once for the
// whole batch and computes kernel weights. `prediction_rng` is only used by
// SampleMemberPerQuery.
PerturbationSet BuildPerturbationSet(const InterpretableInstance& interp,
                                     const Predictor& predictor,
                                     int explained_class,
                                     const PredictionMode& mode,
                                     MaskMatrix masks,
                                     const KernelConfig& kernel,
                                     Rng& prediction_rng);

// Convenience overload that samples n masks from `rng` first.
PerturbationSet BuildPerturbationSet(const InterpretableInstance& interp,
                                     const Predictor& predictor,
                                     int explained_class,
                                     const PredictionMode& mode, int n,
                                     const SurrogateConfig& config,
                                     const KernelConfig& kernel, Rng& rng);

SurrogateCoefficients FitSurrogate(const PerturbationSet& set,
                                   const SurrogateConfig& config);

}  // namespace blime

#endif  // BLIME_SURROGATE_H_
