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

#ifndef BLIME_PREDICTOR_H_
#define BLIME_PREDICTOR_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blime/instance.h"
#include "blime/interpretable.h"
#include "blime/rng.h"

namespace blime {

// Output of a probabilistic classifier for one instance. Entries lie in
// [0, 1] and sum to 1 within 1e-6.
struct ClassProbabilities {
  std::vector<double> values;
};

// Query the ensemble mean.
struct MeanOfMembers {};
// Draw one member uniformly for every instance of the batch.
struct SampleMemberPerQuery {};
// Query a single member for every instance.
struct FixedMember {
  int index = 0;
};
using PredictionMode =
    std::variant<MeanOfMembers, SampleMemberPerQuery, FixedMember>;

// "mean", "sample" or "member:<i>".
std::string FormatPredictionMode(const PredictionMode& mode);
PredictionMode ParsePredictionMode(std::string_view text);

// Probabilistic classifier, possibly an ensemble of members. Implementations
// must be safe to call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Modality modality() const = 0;
  virtual int num_classes() const = 0;
  virtual int num_members() const = 0;

  // `member` selects one ensemble member; std::nullopt requests the ensemble
  // mean.
  virtual std::vector<ClassProbabilities> Predict(
      std::span<const Instance> instances, std::optional<int> member) const = 0;
};

// Throws InputError if `mode` is invalid for `predictor`.
void ValidatePredictionMode(const Predictor& predictor,
                            const PredictionMode& mode);

// Predicts a batch under `mode`. `rng` is only consumed (one draw per
// instance) by SampleMemberPerQuery, where it is required.
std::vector<ClassProbabilities> PredictBatch(const Predictor& predictor,
                                             std::span<const Instance> instances,
                                             const PredictionMode& mode,
                                             Rng* rng);

// Planted-weight logistic ensemble used as a desk-scale black box.
struct SyntheticEnsembleSpec {
  int member_count = 5;
  std::vector<double> base_weights;  // one logit weight per component
  double member_noise_scale = 0.0;
  double bias = 0.0;
  uint64_t seed = 0;
};

// Binary classifier over reconstructions of `interpretable`. Member e
// recovers the active mask z of its input and outputs
//   (1 - sigmoid(logit), sigmoid(logit)),  logit = beta_e . z + bias,
// where beta_e = base_weights + member_noise_scale * eps_e and eps_e is a
// standard normal vector drawn from the stream DeriveSeed(seed, e).
class SyntheticEnsemble : public Predictor {
 public:
  SyntheticEnsemble(SyntheticEnsembleSpec spec,
                    std::shared_ptr<const InterpretableInstance> interpretable);

  Modality modality() const override { return interpretable_->modality(); }
  int num_classes() const override { return 2; }
  int num_members() const override { return spec_.member_count; }

  std::vector<ClassProbabilities> Predict(
      std::span<const Instance> instances,
      std::optional<int> member) const override;

  const std::vector<double>& member_weights(int member) const {
    return member_weights_[member];
  }
  const SyntheticEnsembleSpec& spec() const { return spec_; }

 private:
  SyntheticEnsembleSpec spec_;
  std::shared_ptr<const InterpretableInstance> interpretable_;
  std::vector<std::vector<double>> member_weights_;
};

double Sigmoid(double x);

struct ExternalPredictorOptions {
  std::chrono::milliseconds timeout{10000};
  // Instances per predict request.
  size_t chunk_size = 256;
};

// Predictor backed by a child process speaking line-delimited JSON on its
// stdin/stdout. Requests are serialized; concurrent callers block.
class ExternalPredictor : public Predictor {
 public:
  // Spawns `argv[0]` with `argv` and performs the info handshake. Throws
  // ProtocolError (with captured stderr) on failure.
  ExternalPredictor(std::vector<std::string> argv,
                    ExternalPredictorOptions options = {});
  ~ExternalPredictor() override;

  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  Modality modality() const override;
  int num_classes() const override;
  int num_members() const override;

  std::vector<ClassProbabilities> Predict(
      std::span<const Instance> instances,
      std::optional<int> member) const override;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace blime

#endif  // BLIME_PREDICTOR_H_
