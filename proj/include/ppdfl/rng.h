/*
 * Copyright 2026 The ppdfl Authors
 *
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

#ifndef PPDFL_RNG_H_
#define PPDFL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ppdfl {

// Purposes that get their own independent substreams of the run seed.
enum class StreamTag : uint64_t {
  kShares = 1,
  kTopology = 2,
  kTrainer = 3,
  kInitialModel = 4,
  kSpectral = 5,
  kTest = 6,
};

// Mixes a base seed with a path of integers (tag, round, learner,
// coordinate, ...) into a 64-bit seed. Stable across platforms.
uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path);

// Thin wrapper over std::mt19937_64. Bounded and real draws are computed
// here rather than through <random> distributions, whose output is
// implementation-defined, so results are bit-identical across toolchains.
class DeterministicRng {
 public:
  explicit DeterministicRng(uint64_t seed) : engine_(seed) {}

  static DeterministicRng ForStream(uint64_t seed, StreamTag tag,
                                    std::initializer_list<uint64_t> path = {});

  uint64_t Next() { return engine_(); }

  // Uniform in [0, bound); bound must be positive.
  uint64_t UniformBelow(uint64_t bound);

  // Uniform in [lo, hi] inclusive.
  uint64_t UniformInRange(uint64_t lo, uint64_t hi) {
    return lo + UniformBelow(hi - lo + 1);
  }

  // Uniform double in [0, 1).
  double UniformUnit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double UniformReal(double lo, double hi) {
    return lo + (hi - lo) * UniformUnit();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ppdfl

#endif  // PPDFL_RNG_H_
