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

#include <chrono>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "blime/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace blime {
namespace {

using ::blime::testing::MakePlanted;
using ::blime::testing::SourcePath;
using ::blime::testing::TexturedImage;

std::shared_ptr<const InterpretableInstance> SmallImage(int rows, int cols) {
  Image image = TexturedImage(8, 8, 21);
  SegmentMap seg = GridSegment(image, rows, cols);
  return std::make_shared<InterpretableInstance>(
      InterpretableInstance::ForImage(std::move(image), std::move(seg)));
}

std::vector<Instance> RandomBatch(const InterpretableInstance& interp, int n,
                                  uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> out;
  for (int i = 0; i < n; ++i) {
    Mask mask(interp.num_components());
    for (uint8_t& b : mask) b = rng.Bernoulli(0.5);
    out.push_back(interp.Reconstruct(mask));
  }
  return out;
}

// Fixed two-member predictor for protocol-independent mode checks.
class TwoPoint : public Predictor {
 public:
  Modality modality() const override { return Modality::kText; }
  int num_classes() const override { return 2; }
  int num_members() const override { return 2; }
  std::vector<ClassProbabilities> Predict(std::span<const Instance> instances,
                                          std::optional<int> member) const override {
    std::vector<ClassProbabilities> out;
    for (size_t i = 0; i < instances.size(); ++i) {
      if (!member) out.push_back({{0.5, 0.5}});
      else if (*member == 0) out.push_back({{1.0, 0.0}});
      else out.push_back({{0.0, 1.0}});
    }
    return out;
  }
};

TEST(PredictionMode, FormatParseRoundTrip) {
  for (const char* text : {"mean", "sample", "member:3"}) {
    EXPECT_EQ(FormatPredictionMode(ParsePredictionMode(text)), text);
  }
  EXPECT_THROW(ParsePredictionMode("member:x"), InputError);
  EXPECT_THROW(ParsePredictionMode("median"), InputError);
}

TEST(PredictBatch, MeanOfTwoOpposedMembers) {
  TwoPoint p;
  const std::vector<Instance> batch = {std::string("x")};
  const auto out = PredictBatch(p, batch, MeanOfMembers{}, nullptr);
  EXPECT_EQ(out[0].values, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(PredictBatch(p, batch, FixedMember{1}, nullptr)[0].values,
            (std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(PredictBatch(p, batch, FixedMember{2}, nullptr), InputError);
  EXPECT_THROW(PredictBatch(p, batch, SampleMemberPerQuery{}, nullptr), Error);
}

TEST(PredictBatch, ModalityMismatchIsInputError) {
  TwoPoint p;
  const std::vector<Instance> batch = {Image(2, 2, 1)};
  EXPECT_THROW(PredictBatch(p, batch, MeanOfMembers{}, nullptr), InputError);
}

TEST(PredictBatch, SampleModeDrawsBothMembersAndIsReproducible) {
  TwoPoint p;
  const std::vector<Instance> batch(400, std::string("x"));
  Rng a(5), b(5);
  const auto first = PredictBatch(p, batch, SampleMemberPerQuery{}, &a);
  const auto second = PredictBatch(p, batch, SampleMemberPerQuery{}, &b);
  int ones = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(first[i].values, second[i].values);
    ones += first[i].values[1] == 1.0;
  }
  EXPECT_GT(ones, 150);
  EXPECT_LT(ones, 250);
}

TEST(SyntheticEnsemble, ZeroWeightsGiveHalf) {
  auto interp = SmallImage(1, 3);
  SyntheticEnsembleSpec spec;
  spec.member_count = 3;
  spec.base_weights = {0, 0, 0};
  const SyntheticEnsemble p(spec, interp);
  for (const auto& probs :
       PredictBatch(p, RandomBatch(*interp, 10, 1), MeanOfMembers{}, nullptr)) {
    EXPECT_EQ(probs.values, (std::vector<double>{0.5, 0.5}));
  }
}

TEST(SyntheticEnsemble, PlantedComponentRaisesProbability) {
  auto interp = SmallImage(2, 2);
  SyntheticEnsembleSpec spec;
  spec.member_count = 1;
  spec.base_weights = {0, 0, 0, 5};
  const SyntheticEnsemble p(spec, interp);
  const std::vector<Instance> batch = {interp->Reconstruct(Mask{1, 1, 1, 1}),
                                       interp->Reconstruct(Mask{1, 1, 1, 0})};
  const auto out = p.Predict(batch, std::nullopt);
  EXPECT_GT(out[0].values[1], out[1].values[1]);
}

TEST(SyntheticEnsemble, LogisticOfSingleActiveWeight) {
  auto interp = SmallImage(1, 3);
  SyntheticEnsembleSpec spec;
  spec.member_count = 1;
  spec.base_weights = {5, 0, 0};
  const SyntheticEnsemble p(spec, interp);
  const std::vector<Instance> batch = {interp->Reconstruct(Mask{1, 0, 0})};
  const auto out = p.Predict(batch, std::nullopt);
  EXPECT_NEAR(out[0].values[1], 0.9933071490757153, 1e-15);
  EXPECT_NEAR(out[0].values[0], 1.0 - 0.9933071490757153, 1e-15);
}

TEST(SyntheticEnsemble, ZeroNoiseMembersAgree) {
  auto planted = MakePlanted(0.0, 2);
  const auto batch = RandomBatch(*planted.interp, 50, 3);
  Rng rng(8);
  const auto sampled =
      PredictBatch(*planted.predictor, batch, SampleMemberPerQuery{}, &rng);
  const auto mean = PredictBatch(*planted.predictor, batch, MeanOfMembers{}, nullptr);
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(sampled[i].values, mean[i].values);
  }
}

TEST(SyntheticEnsemble, SingleMemberAllModesIdentical) {
  auto planted = MakePlanted(0.7, 1);
  const auto batch = RandomBatch(*planted.interp, 30, 4);
  Rng rng(1);
  const auto a = PredictBatch(*planted.predictor, batch, MeanOfMembers{}, nullptr);
  const auto b = PredictBatch(*planted.predictor, batch, SampleMemberPerQuery{}, &rng);
  const auto c = PredictBatch(*planted.predictor, batch, FixedMember{0}, nullptr);
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    EXPECT_EQ(a[i].values, c[i].values);
  }
}

TEST(SyntheticEnsemble, MeanEqualsAverageOfMembers) {
  auto planted = MakePlanted(0.5, 5);
  const auto batch = RandomBatch(*planted.interp, 100, 6);
  const auto mean = PredictBatch(*planted.predictor, batch, MeanOfMembers{}, nullptr);
  std::vector<double> acc(batch.size(), 0.0);
  for (int e = 0; e < 5; ++e) {
    const auto member = PredictBatch(*planted.predictor, batch, FixedMember{e}, nullptr);
    for (size_t i = 0; i < batch.size(); ++i) acc[i] += member[i].values[1] / 5.0;
  }
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_NEAR(mean[i].values[1], acc[i], 1e-9);
    EXPECT_NEAR(mean[i].values[0] + mean[i].values[1], 1.0, 1e-12);
  }
}

TEST(SyntheticEnsemble, MemberWeightsFollowSeedDerivation) {
  auto planted = MakePlanted(0.3, 3, 77);
  auto again = MakePlanted(0.3, 3, 77);
  for (int e = 0; e < 3; ++e) {
    EXPECT_EQ(planted.predictor->member_weights(e), again.predictor->member_weights(e));
    // beta_e = beta + noise * N(0,1) with the normal stream seeded per member.
    Rng rng(DeriveSeed(77, e));
    for (size_t j = 0; j < 8; ++j) {
      EXPECT_EQ(planted.predictor->member_weights(e)[j],
                testing::PlantedBeta()[j] + 0.3 * rng.StandardNormal());
    }
  }
  EXPECT_NE(planted.predictor->member_weights(0), planted.predictor->member_weights(1));
}

TEST(SyntheticEnsemble, RejectsForeignInstances) {
  auto planted = MakePlanted(0.0);
  const std::vector<Instance> batch = {TexturedImage(16, 16, 999)};
  EXPECT_THROW(planted.predictor->Predict(batch, std::nullopt), InputError);
}

TEST(SyntheticEnsemble, RejectsWeightCountMismatch) {
  SyntheticEnsembleSpec spec;
  spec.base_weights = {1.0, 2.0};
  EXPECT_THROW(SyntheticEnsemble(spec, SmallImage(2, 2)), Error);
}

// ---- External predictor over the line protocol. ----

std::vector<std::string> RefCommand(const std::string& modality,
                                    const std::string& fail = "") {
  std::vector<std::string> argv = {BLIME_PYTHON,
                                   SourcePath("tests/fixtures/ref_predictor.py"),
                                   "--modality", modality};
  if (!fail.empty()) {
    argv.push_back("--fail");
    argv.push_back(fail);
  }
  return argv;
}

TEST(ExternalPredictor, HandshakeAndRoundTrip) {
  ExternalPredictorOptions options;
  options.chunk_size = 64;
  const ExternalPredictor p(RefCommand("text"), options);
  EXPECT_EQ(p.modality(), Modality::kText);
  EXPECT_EQ(p.num_classes(), 2);
  EXPECT_EQ(p.num_members(), 3);
  std::vector<Instance> batch;
  for (int i = 0; i < 300; ++i) {
    batch.push_back(std::string(i % 2 ? "superb moving film" : "dull and rushed"));
  }
  const auto out = p.Predict(batch, std::nullopt);
  ASSERT_EQ(out.size(), 300u);
  EXPECT_GT(out[1].values[1], 0.5);
  EXPECT_LT(out[0].values[1], 0.5);
  const auto member = p.Predict(batch, 2);
  EXPECT_NE(member[1].values[1], out[1].values[1]);
}

TEST(ExternalPredictor, ImageInstancesAreSent) {
  const ExternalPredictor p(RefCommand("image"));
  EXPECT_EQ(p.modality(), Modality::kImage);
  // Textured left half versus a flat image.
  Image textured(4, 4, 3);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 2; ++x) {
      for (int c = 0; c < 3; ++c) textured.at(x, y, c) = (x + y) % 2 ? 255 : 0;
    }
  }
  const std::vector<Instance> batch = {textured, Image(4, 4, 3)};
  const auto out = p.Predict(batch, std::nullopt);
  EXPECT_GT(out[0].values[1], out[1].values[1]);
}

std::string FailureMessage(const std::string& mode,
                           ExternalPredictorOptions options = {}) {
  try {
    const ExternalPredictor p(RefCommand("text", mode), options);
    const std::vector<Instance> batch = {std::string("good")};
    p.Predict(batch, std::nullopt);
  } catch (const ProtocolError& e) {
    return e.what();
  }
  return "no error";
}

TEST(ExternalPredictor, FailuresBecomeProtocolErrors) {
  EXPECT_NE(FailureMessage("malformed"), "no error");
  EXPECT_NE(FailureMessage("error").find("model exploded"), std::string::npos);
  EXPECT_NE(FailureMessage("crash").find("simulated crash"), std::string::npos);
  EXPECT_NE(FailureMessage("bad-id"), "no error");
  EXPECT_NE(FailureMessage("bad-sum"), "no error");
}

TEST(ExternalPredictor, TimeoutIsProtocolError) {
  ExternalPredictorOptions options;
  options.timeout = std::chrono::milliseconds(300);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_NE(FailureMessage("hang", options), "no error");
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(ExternalPredictor, MissingExecutableIsProtocolError) {
  EXPECT_THROW(ExternalPredictor({"/nonexistent/predictor"}), ProtocolError);
}

}  // namespace
}  // namespace blime
