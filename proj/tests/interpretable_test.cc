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

#include "blime/interpretable.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "blime/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace blime {
namespace {

using ::blime::testing::SourcePath;
using ::blime::testing::TexturedImage;

TEST(GridSegment, EvenQuadrants) {
  const SegmentMap seg = GridSegment(Image(4, 4, 3), 2, 2);
  EXPECT_EQ(seg.num_components, 4);
  const std::vector<int> expected = {0, 0, 1, 1,  //
                                     0, 0, 1, 1,  //
                                     2, 2, 3, 3,  //
                                     2, 2, 3, 3};
  EXPECT_EQ(seg.labels, expected);
}

TEST(GridSegment, RemainderGoesToFirstBands) {
  const SegmentMap seg = GridSegment(Image(5, 4, 1), 1, 2);
  EXPECT_EQ(seg.num_components, 2);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) EXPECT_EQ(seg.label(x, y), x < 3 ? 0 : 1);
  }
}

TEST(GridSegment, TwoByFourGivesEightComponents) {
  const SegmentMap seg = GridSegment(Image(32, 32, 3), 2, 4);
  EXPECT_EQ(seg.num_components, 8);
  EXPECT_EQ(seg.label(0, 0), 0);
  EXPECT_EQ(seg.label(31, 0), 3);
  EXPECT_EQ(seg.label(0, 31), 4);
  EXPECT_EQ(seg.label(31, 31), 7);
}

TEST(GridSegment, RejectsBadShapes) {
  EXPECT_THROW(GridSegment(Image(4, 4, 1), 1, 1), InputError);
  EXPECT_THROW(GridSegment(Image(4, 4, 1), 5, 1), InputError);
  EXPECT_THROW(GridSegment(Image(4, 4, 1), 1, 5), InputError);
}

TEST(SegmentMap, ParseValidCsv) {
  const SegmentMap seg = ParseSegmentMap("0,0,1\n2,2,1\n", Image(3, 2, 1));
  EXPECT_EQ(seg.num_components, 3);
  EXPECT_EQ(seg.labels, (std::vector<int>{0, 0, 1, 2, 2, 1}));
}

TEST(SegmentMap, ErrorsNameTheOffendingCell) {
  const Image image(3, 2, 1);
  auto message = [&](const std::string& csv) {
    try {
      ParseSegmentMap(csv, image);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  // Non-contiguous: label 2 missing.
  EXPECT_NE(message("0,0,1\n3,3,1\n"), "no error");
  // Malformed cell.
  const std::string bad = message("0,0,1\n2,x,1\n");
  EXPECT_NE(bad.find("row 2"), std::string::npos) << bad;
  EXPECT_NE(bad.find("column 2"), std::string::npos) << bad;
  // Dimension mismatches.
  EXPECT_NE(message("0,0\n1,1\n"), "no error");
  EXPECT_NE(message("0,0,1\n"), "no error");
  EXPECT_NE(message("0,0,1\n1,1,-1\n"), "no error");
}

TEST(SegmentMap, BundledMapsLoad) {
  const Image image = ReadPng(SourcePath("data/bird32.png"));
  EXPECT_EQ(LoadSegmentMap(SourcePath("data/grid_2x4.csv"), image).labels,
            GridSegment(image, 2, 4).labels);
  const SegmentMap irregular =
      LoadSegmentMap(SourcePath("data/irregular_8.csv"), image);
  EXPECT_EQ(irregular.num_components, 8);
  EXPECT_THROW(LoadSegmentMap(SourcePath("data/missing.csv"), image), Error);
}

TEST(Tokenize, Examples) {
  const TokenMap a = Tokenize("good movie good", false);
  EXPECT_EQ(a.tokens, (std::vector<std::string>{"good", "movie"}));
  EXPECT_EQ(a.occurrences[0].size(), 2u);
  EXPECT_EQ(Tokenize("Good good", true).num_components(), 1);
  EXPECT_EQ(Tokenize("Good good", false).num_components(), 2);
  EXPECT_EQ(Tokenize("a-b", false).tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(Tokenize("  ... !", true), InputError);
}

TEST(Tokenize, SpansCoverEveryOccurrence) {
  const std::string text = "The cat, the dog; THE end.";
  const TokenMap map = Tokenize(text, true);
  size_t covered = 0;
  for (size_t t = 0; t < map.tokens.size(); ++t) {
    for (const TokenSpan& span : map.occurrences[t]) {
      ASSERT_LT(span.begin, span.end);
      ASSERT_LE(span.end, text.size());
      std::string word = text.substr(span.begin, span.end - span.begin);
      for (char& c : word) c = static_cast<char>(std::tolower(c));
      EXPECT_EQ(word, map.tokens[t]);
      ++covered;
    }
  }
  EXPECT_EQ(covered, 6u);
}

TEST(Reconstruct, AllOnesIsBitExactOriginal) {
  const Image image = TexturedImage(13, 9, 5);
  const InterpretableInstance interp =
      InterpretableInstance::ForImage(image, GridSegment(image, 3, 2));
  EXPECT_EQ(std::get<Image>(interp.Reconstruct(Mask(6, 1))), image);

  const std::string text = "  Odd   spacing,  kept  exactly ";
  const InterpretableInstance t = InterpretableInstance::ForText(text, true);
  EXPECT_EQ(std::get<std::string>(t.Reconstruct(Mask(t.num_components(), 1))),
            text);
}

TEST(Reconstruct, AllZerosGivesComponentMeans) {
  Image image(4, 2, 3);
  // Left component: values 10 and 13 -> mean 11.5 rounds up to 12.
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) {
        image.at(x, y, c) = x < 2 ? (y == 0 ? 10 : 13) : 200 + c;
      }
    }
  }
  const InterpretableInstance interp =
      InterpretableInstance::ForImage(image, GridSegment(image, 1, 2));
  const Image out = std::get<Image>(interp.Reconstruct(Mask{0, 0}));
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(out.at(x, y, c), x < 2 ? 12 : 200 + c);
      }
    }
  }
}

TEST(Reconstruct, FixedColorBaseline) {
  const Image image = TexturedImage(4, 4, 2);
  const InterpretableInstance interp = InterpretableInstance::ForImage(
      image, GridSegment(image, 2, 2), FixedColor{1, 2, 3});
  const Image out = std::get<Image>(interp.Reconstruct(Mask{1, 0, 1, 1}));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const bool hidden = y < 2 && x >= 2;
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(out.at(x, y, c), hidden ? c + 1 : image.at(x, y, c));
      }
    }
  }
}

TEST(Reconstruct, TextDeletesAllOccurrences) {
  const InterpretableInstance t =
      InterpretableInstance::ForText("good bad good", false);
  ASSERT_EQ(t.ComponentNames(), (std::vector<std::string>{"good", "bad"}));
  EXPECT_EQ(std::get<std::string>(t.Reconstruct(Mask{0, 1})), "bad");
  EXPECT_EQ(std::get<std::string>(t.Reconstruct(Mask{1, 0})), "good good");
  EXPECT_EQ(std::get<std::string>(t.Reconstruct(Mask{0, 0})), "");
}

TEST(Reconstruct, RejectsWrongMaskLength) {
  const InterpretableInstance t = InterpretableInstance::ForText("a b c", false);
  EXPECT_THROW(t.Reconstruct(Mask{1, 1}), InputError);
}

TEST(Reconstruct, IdempotentAndMeanPreservingOnRandomMasks) {
  const Image image = ReadPng(SourcePath("data/bird32.png"));
  const SegmentMap seg = LoadSegmentMap(SourcePath("data/irregular_8.csv"), image);
  const InterpretableInstance interp = InterpretableInstance::ForImage(image, seg);
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Mask mask(8);
    for (uint8_t& b : mask) b = rng.Bernoulli(0.5);
    const Image a = std::get<Image>(interp.Reconstruct(mask));
    EXPECT_EQ(a, std::get<Image>(interp.Reconstruct(mask)));
    EXPECT_EQ(interp.RecoverMask(a), mask);
    // Per-component mean colour is preserved within 1/255 on a 0..1 scale.
    for (int j = 0; j < 8; ++j) {
      for (int c = 0; c < image.channels; ++c) {
        double before = 0.0, after = 0.0;
        int count = 0;
        for (int y = 0; y < image.height; ++y) {
          for (int x = 0; x < image.width; ++x) {
            if (seg.label(x, y) != j) continue;
            before += image.at(x, y, c);
            after += a.at(x, y, c);
            ++count;
          }
        }
        EXPECT_LE(std::abs(before - after) / count, 1.0);
      }
    }
  }
}

TEST(Reconstruct, TextRecoverMaskRoundTrip) {
  const InterpretableInstance t = InterpretableInstance::ForText(
      ReadTextFile(SourcePath("data/review.txt")), true);
  ASSERT_EQ(t.num_components(), 16);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Mask mask(16);
    for (uint8_t& b : mask) b = rng.Bernoulli(0.5);
    EXPECT_EQ(t.RecoverMask(t.Reconstruct(mask)), mask);
  }
  EXPECT_THROW(t.RecoverMask(std::string("completely unrelated words")),
               InputError);
}

TEST(Png, WriteReadRoundTrip) {
  const Image image = TexturedImage(7, 5, 8);
  const std::string path = ::testing::TempDir() + "/round_trip.png";
  WritePng(path, image);
  EXPECT_EQ(ReadPng(path), image);
  std::remove(path.c_str());
  EXPECT_THROW(ReadPng(path), IoError);
}

TEST(InterpretableInstance, RequiresTwoComponents) {
  EXPECT_THROW(InterpretableInstance::ForText("only only", false), InputError);
}

}  // namespace
}  // namespace blime
