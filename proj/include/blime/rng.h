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

#ifndef BLIME_RNG_H_
#define BLIME_RNG_H_

#include <cstdint>

namespace blime {

// SplitMix64 finalizer. Bijective on 64-bit words; used both as the
// generator's output function and to derive independent stream seeds.
constexpr uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of child stream `index` of the stream seeded by `parent`:
//   Mix64(parent + Mix64(index + 0x9e3779b97f4a7c15)).
// Child streams are a pure function of (parent, index), which is what makes
// per-surrogate and per-replicate results independent of scheduling.
constexpr uint64_t DeriveSeed(uint64_t parent, uint64_t index) {
  return Mix64(parent + Mix64(index + 0x9e3779b97f4a7c15ULL));
}

// Inverse of the standard normal CDF (Acklam's rational approximation with
// one Halley refinement step; |error| < 1e-12 on (0, 1)).
double InverseNormalCdf(double p);

// Portable SplitMix64 generator. The standard <random> distributions are
// implementation-defined, so all sampling goes through the helpers below to
// keep results bit-identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double NextDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  bool Bernoulli(double p) { return NextDouble() < p; }

  // Uniform in [0, n) by rejection; n must be positive.
  uint64_t UniformIndex(uint64_t n);

  double StandardNormal();

 private:
  uint64_t state_;
};

}  // namespace blime

#endif  // BLIME_RNG_H_
