// Copyright 2026 The expost-erm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EXPOST_RANDOM_H_
#define EXPOST_RANDOM_H_

#include <array>
#include <cstdint>
#include <initializer_list>

namespace expost {

// Philox4x32-10 block function. Exposed for known-answer testing.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// Seedable, counter-based source of uniform bits. The 64-bit seed is the
// Philox key; the stream id occupies the upper half of the 128-bit counter,
// so distinct stream ids never share a block. Output depends only on
// (seed, stream_id, number of draws so far), which makes every draw
// reproducible across platforms.
//
// Not thread-safe; give each consumer its own instance.
class RandomSource {
 public:
  RandomSource(uint64_t seed, uint64_t stream_id);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  uint64_t NextUint64();

  // Uniform on [0, 1) with 53 bits of resolution.
  double NextUniform();

  // Uniform on the open interval (0, 1); exact 0 is rejected and redrawn.
  double NextOpenUniform();

  // Standard normal via Box-Muller. Only used by the synthetic generators.
  double NextGaussian();

  // Standard logistic via inverse CDF.
  double NextLogistic();

 private:
  void Refill();

  uint64_t seed_;
  uint64_t stream_id_;
  uint64_t block_index_ = 0;
  std::array<uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

// Mixes a list of integers into one 64-bit value (SplitMix64 finalizer
// chained over the inputs). Used to derive per-trial seeds.
uint64_t MixSeed(std::initializer_list<uint64_t> parts);

}  // namespace expost

#endif  // EXPOST_RANDOM_H_
