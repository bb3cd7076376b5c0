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
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "blime/error.h"

namespace blime {

Eigen::MatrixXd MaskMatrix::ToDesign() const {
  Eigen::MatrixXd design(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) design(i, j) = (*this)(i, j);
  }
  return design;
}

nlohmann::json ToJson(const PerturbationSet& set) {
  nlohmann::json masks = nlohmann::json::array();
  for (int i = 0; i < set.masks.rows(); ++i) {
    auto row = set.masks.row(i);
    masks.push_back(std::vector<int>(row.begin(), row.end()));
  }
  return {{"masks", std::move(masks)},
          {"targets", set.targets},
          {"weights", set.weights}};
}

MaskMatrix SampleMasks(int n, int m, const SurrogateConfig& config, Rng& rng) {
  if (n < 2) throw InputError("need at least 2 perturbations to fit");
  if (m < 2) throw InputError("need at least 2 components");
  if (!(config.activation_prob > 0.0 && config.activation_prob < 1.0)) {
    throw InputError("activation probability must lie in (0, 1)");
  }
  MaskMatrix masks(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      masks(i, j) = rng.Bernoulli(config.activation_prob) ? 1 : 0;
    }
  }
  if (config.include_original) {
    for (uint8_t& v : masks.row(0)) v = 1;
  }
  return masks;
}

std::vector<double> KernelWeights(const MaskMatrix& masks,
                                  const KernelConfig& kernel, int* zero_rows) {
  if (!(kernel.width > 0.0)) throw InputError("kernel width must be positive");
  const double norm_ones = std::sqrt(static_cast<double>(masks.cols()));
  const double width_sq = kernel.width * kernel.width;
  std::vector<double> weights(masks.rows());
  int zeros = 0;
  for (int i = 0; i < masks.rows(); ++i) {
    int active = 0;
    for (uint8_t v : masks.row(i)) active += v != 0;
    double distance = 1.0;
    if (active == 0) {
      ++zeros;
    } else {
      // z.1 = |z|^2 = active for binary z.
      distance = 1.0 - active / (std::sqrt(static_cast<double>(active)) *
                                 norm_ones);
      if (active == masks.cols()) distance = 0.0;
    }
    weights[i] = std::exp(-distance * distance / width_sq);
  }
  if (zero_rows != nullptr) *zero_rows = zeros;
  return weights;
}

SurrogateCoefficients FitWeightedRidge(const Eigen::MatrixXd& design,
                                       std::span<const double> targets,
                                       std::span<const double> weights,
                                       const SurrogateConfig& config) {
  const Eigen::Index n = design.rows();
  const Eigen::Index m = design.cols();
  if (n < 2) throw InputError("need at least 2 rows to fit");
  if (m < 1) throw InputError("design has no columns");
  if (targets.size() != static_cast<size_t>(n) ||
      weights.size() != static_cast<size_t>(n)) {
    throw InputError("design, targets and weights disagree on row count");
  }
  if (!(config.ridge_lambda >= 0.0) || !std::isfinite(config.ridge_lambda)) {
    throw InputError("ridge lambda must be finite and nonnegative");
  }
  if (!design.allFinite()) throw InputError("non-finite design entry");

  const Eigen::Map<const Eigen::VectorXd> y(targets.data(), n);
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
  if (!y.allFinite() || !w.allFinite()) {
    throw InputError("non-finite target or weight");
  }
  if ((w.array() < 0.0).any()) throw InputError("negative weight");
  const double total_weight = w.sum();
  if (!(total_weight > 0.0)) throw InputError("all weights are zero");

  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(m);
  double y_mean = 0.0;
  if (config.fit_intercept) {
    x_mean = (w.transpose() * design) / total_weight;
    y_mean = w.dot(y) / total_weight;
  }
  const Eigen::MatrixXd xc = design.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  const Eigen::VectorXd sqrt_w = w.array().sqrt();
  const Eigen::MatrixXd xw = sqrt_w.asDiagonal() * xc;
  const Eigen::VectorXd yw = sqrt_w.cwiseProduct(yc);

  SurrogateCoefficients out;
  Eigen::VectorXd alpha;
  bool solved = false;
  if (config.ridge_lambda > 0.0) {
    Eigen::MatrixXd gram = xw.transpose() * xw;
    gram.diagonal().array() += config.ridge_lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      alpha = llt.solve(xw.transpose() * yw);
      solved = true;
    }
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xw);
    if (cod.rank() == m) {
      Eigen::LLT<Eigen::MatrixXd> llt(xw.transpose() * xw);
      if (llt.info() == Eigen::Success) {
        alpha = llt.solve(xw.transpose() * yw);
        solved = true;
      }
    }
    if (!solved) {
      alpha = cod.solve(yw);
      out.rank_deficient = true;
      solved = true;
    }
  }
  if (!solved) {
    // lambda > 0 keeps the system positive definite; only reachable through
    // overflow in the Gram matrix.
    throw InputError("ridge system is not positive definite");
  }

  out.alpha.assign(alpha.data(), alpha.data() + m);
  out.intercept = config.fit_intercept ? y_mean - x_mean.dot(alpha) : 0.0;

  const Eigen::VectorXd residual =
      (y - design * alpha).array() - out.intercept;
  const double rss = (w.array() * residual.array().square()).sum();
  const double y_wmean = w.dot(y) / total_weight;
  const double tss = (w.array() * (y.array() - y_wmean).square()).sum();
  out.weighted_r2 = tss / total_weight < 1e-12 ? 1.0 : 1.0 - rss / tss;
  return out;
}

PerturbationSet BuildPerturbationSet(const InterpretableInstance& interp,
                                     const Predictor& predictor,
                                     int explained_class,
                                     const PredictionMode& mode,
                                     MaskMatrix masks,
                                     const KernelConfig& kernel,
                                     Rng& prediction_rng) {
  if (explained_class < 0 || explained_class >= predictor.num_classes()) {
    throw InputError("explained class " + std::to_string(explained_class) +
                     " out of range for " +
                     std::to_string(predictor.num_classes()) + " classes");
  }
  if (masks.cols() != interp.num_components()) {
    throw InputError("mask width does not match the component count");
  }
  std::vector<Instance> perturbed;
  perturbed.reserve(masks.rows());
  for (int i = 0; i < masks.rows(); ++i) {
    perturbed.push_back(interp.Reconstruct(masks.row(i)));
  }
  const std::vector<ClassProbabilities> probs =
      PredictBatch(predictor, perturbed, mode, &prediction_rng);

  PerturbationSet set;
  set.targets.reserve(probs.size());
  for (const ClassProbabilities& p : probs) {
    set.targets.push_back(p.values.at(explained_class));
  }
  set.weights = KernelWeights(masks, kernel, &set.zero_mask_rows);
  set.masks = std::move(masks);
  return set;
}

PerturbationSet BuildPerturbationSet(const InterpretableInstance& interp,
                                     const Predictor& predictor,
                                     int explained_class,
                                     const PredictionMode& mode, int n,
                                     const SurrogateConfig& config,
                                     const KernelConfig& kernel, Rng& rng) {
  MaskMatrix masks = SampleMasks(n, interp.num_components(), config, rng);
  return BuildPerturbationSet(interp, predictor, explained_class, mode,
                              std::move(masks), kernel, rng);
}

SurrogateCoefficients FitSurrogate(const PerturbationSet& set,
                                   const SurrogateConfig& config) {
  return FitWeightedRidge(set.masks.ToDesign(), set.targets, set.weights,
                          config);
}

}  // namespace blime
