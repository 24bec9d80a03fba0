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

#include "expost/random.h"

#include <cmath>
#include <numbers>

namespace expost {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85;
constexpr int kPhiloxRounds = 10;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(product >> 32);
  lo = static_cast<uint32_t>(product);
}

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key) {
  for (int round = 0; round < kPhiloxRounds; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], hi0, lo0);
    MulHiLo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomSource::RandomSource(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RandomSource::Refill() {
  const std::array<uint32_t, 4> counter = {
      static_cast<uint32_t>(block_index_),
      static_cast<uint32_t>(block_index_ >> 32),
      static_cast<uint32_t>(stream_id_),
      static_cast<uint32_t>(stream_id_ >> 32)};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_),
                                       static_cast<uint32_t>(seed_ >> 32)};
  buffer_ = Philox4x32(counter, key);
  buffered_ = 4;
  ++block_index_;
}

uint64_t RandomSource::NextUint64() {
  if (buffered_ < 2) Refill();
  const uint64_t lo = buffer_[4 - buffered_];
  const uint64_t hi = buffer_[5 - buffered_];
  buffered_ -= 2;
  return (hi << 32) | lo;
}

double RandomSource::NextUniform() {
  return static_cast<double>(NextUint64() >> 11) * 0x1.0p-53;
}

double RandomSource::NextOpenUniform() {
  double u = NextUniform();
  while (u == 0.0) u = NextUniform();
  return u;
}

double RandomSource::NextGaussian() {
  const double u1 = NextOpenUniform();
  const double u2 = NextUniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RandomSource::NextLogistic() {
  const double u = NextOpenUniform();
  return std::log(u) - std::log1p(-u);
}

uint64_t MixSeed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x6A09E667F3BCC909ULL;
  for (uint64_t part : parts) h = SplitMix64(h ^ SplitMix64(part));
  return h;
}

}  // namespace expost
