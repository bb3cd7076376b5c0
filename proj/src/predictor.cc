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

#include "blime/predictor.h"

#include <charconv>
#include <cmath>
#include <map>
#include <utility>

#include "blime/error.h"

namespace blime {

std::string FormatPredictionMode(const PredictionMode& mode) {
  if (std::holds_alternative<MeanOfMembers>(mode)) return "mean";
  if (std::holds_alternative<SampleMemberPerQuery>(mode)) return "sample";
  return "member:" + std::to_string(std::get<FixedMember>(mode).index);
}

PredictionMode ParsePredictionMode(std::string_view text) {
  if (text == "mean") return MeanOfMembers{};
  if (text == "sample") return SampleMemberPerQuery{};
  constexpr std::string_view kPrefix = "member:";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    std::string_view digits = text.substr(kPrefix.size());
    int index = -1;
    auto [end, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && end == digits.data() + digits.size() &&
        index >= 0) {
      return FixedMember{index};
    }
  }
  throw InputError("unknown prediction mode '" + std::string(text) +
                   "' (expected mean, sample or member:<i>)");
}

void ValidatePredictionMode(const Predictor& predictor,
                            const PredictionMode& mode) {
  if (const auto* fixed = std::get_if<FixedMember>(&mode)) {
    if (fixed->index < 0 || fixed->index >= predictor.num_members()) {
      throw InputError("member index " + std::to_string(fixed->index) +
                       " out of range for an ensemble of " +
                       std::to_string(predictor.num_members()));
    }
  }
}

std::vector<ClassProbabilities> PredictBatch(const Predictor& predictor,
                                             std::span<const Instance> instances,
                                             const PredictionMode& mode,
                                             Rng* rng) {
  ValidatePredictionMode(predictor, mode);
  for (const Instance& instance : instances) {
    if (ModalityOf(instance) != predictor.modality()) {
      throw InputError("predictor accepts " +
                       std::string(ModalityName(predictor.modality())) +
                       " instances, got " +
                       std::string(ModalityName(ModalityOf(instance))));
    }
  }
  if (std::holds_alternative<MeanOfMembers>(mode)) {
    return predictor.Predict(instances, std::nullopt);
  }
  if (const auto* fixed = std::get_if<FixedMember>(&mode)) {
    return predictor.Predict(instances, fixed->index);
  }

  if (rng == nullptr) {
    throw InputError("SampleMemberPerQuery requires an RNG stream");
  }
  // Draw all members first so the stream consumption is independent of how
  // the batch is grouped below.
  const int members = predictor.num_members();
  std::vector<int> drawn(instances.size());
  for (int& m : drawn) m = static_cast<int>(rng->UniformIndex(members));

  std::map<int, std::vector<size_t>> by_member;
  for (size_t i = 0; i < drawn.size(); ++i) by_member[drawn[i]].push_back(i);

  std::vector<ClassProbabilities> out(instances.size());
  for (const auto& [member, positions] : by_member) {
    std::vector<Instance> group;
    group.reserve(positions.size());
    for (size_t pos : positions) group.push_back(instances[pos]);
    std::vector<ClassProbabilities> probs = predictor.Predict(group, member);
    for (size_t i = 0; i < positions.size(); ++i) {
      out[positions[i]] = std::move(probs[i]);
    }
  }
  return out;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

SyntheticEnsemble::SyntheticEnsemble(
    SyntheticEnsembleSpec spec,
    std::shared_ptr<const InterpretableInstance> interpretable)
    : spec_(std::move(spec)), interpretable_(std::move(interpretable)) {
  if (!interpretable_) throw InputError("synthetic ensemble needs an instance");
  if (spec_.member_count < 1) {
    throw InputError("synthetic ensemble needs member_count >= 1");
  }
  if (spec_.member_noise_scale < 0 || !std::isfinite(spec_.member_noise_scale)) {
    throw InputError("member noise scale must be finite and nonnegative");
  }
  const int m = interpretable_->num_components();
  if (spec_.base_weights.size() != static_cast<size_t>(m)) {
    throw InputError("synthetic ensemble has " +
                     std::to_string(spec_.base_weights.size()) +
                     " base weights but the instance has " + std::to_string(m) +
                     " components");
  }
  member_weights_.resize(spec_.member_count);
  for (int e = 0; e < spec_.member_count; ++e) {
    Rng noise(DeriveSeed(spec_.seed, static_cast<uint64_t>(e)));
    std::vector<double>& beta = member_weights_[e];
    beta.resize(m);
    for (int j = 0; j < m; ++j) {
      beta[j] = spec_.base_weights[j] +
                spec_.member_noise_scale * noise.StandardNormal();
    }
  }
}

std::vector<ClassProbabilities> SyntheticEnsemble::Predict(
    std::span<const Instance> instances, std::optional<int> member) const {
  if (member && (*member < 0 || *member >= spec_.member_count)) {
    throw InputError("member index " + std::to_string(*member) +
                     " out of range");
  }
  std::vector<ClassProbabilities> out;
  out.reserve(instances.size());
  for (const Instance& instance : instances) {
    const Mask mask = interpretable_->RecoverMask(instance);
    auto member_prob = [&](int e) {
      double logit = spec_.bias;
      const std::vector<double>& beta = member_weights_[e];
      for (size_t j = 0; j < mask.size(); ++j) {
        if (mask[j]) logit += beta[j];
      }
      return Sigmoid(logit);
    };
    double p1;
    if (member) {
      p1 = member_prob(*member);
    } else {
      double sum = 0.0;
      for (int e = 0; e < spec_.member_count; ++e) sum += member_prob(e);
      p1 = sum / spec_.member_count;
    }
    out.push_back({{1.0 - p1, p1}});
  }
  return out;
}

}  // namespace blime
