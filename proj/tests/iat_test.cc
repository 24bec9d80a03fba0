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

#include "expost/iat.h"

#include <cmath>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "expost/random.h"

namespace expost {
namespace {

using ::absl::StatusCode;

QueryStream FromVector(std::vector<double> values, int* pulled = nullptr) {
  return [values = std::move(values),
          pulled](int t) -> absl::StatusOr<std::optional<double>> {
    if (pulled != nullptr) ++*pulled;
    if (t > static_cast<int>(values.size())) return std::nullopt;
    return values[t - 1];
  };
}

TEST(RunIatTest, EmptyStreamIsBottom) {
  IatConfig config{1.0, 0.0, 1.0, 0, 0.1};
  RandomSource rng(1, 0);
  IatOutcome outcome = *RunIat(config, FromVector({}), rng);
  EXPECT_FALSE(outcome.halted);
  EXPECT_EQ(outcome.stop_index, 0);
}

TEST(RunIatTest, ClearlyAboveHaltsImmediately) {
  IatConfig config{1e6, 0.0, 1.0, 1, 0.1};
  RandomSource rng(2, 0);
  for (int run = 0; run < 1000; ++run) {
    IatOutcome outcome = *RunIat(config, FromVector({1.0}), rng);
    ASSERT_TRUE(outcome.halted);
    ASSERT_EQ(outcome.stop_index, 1);
  }
}

TEST(RunIatTest, ClearlyBelowNeverHalts) {
  IatConfig config{1e6, 0.0, 1.0, 10, 0.1};
  RandomSource rng(3, 0);
  for (int run = 0; run < 1000; ++run) {
    IatOutcome outcome =
        *RunIat(config, FromVector(std::vector<double>(10, -1.0)), rng);
    ASSERT_FALSE(outcome.halted);
    ASSERT_EQ(outcome.stop_index, 10);
  }
}

TEST(RunIatTest, ShortStreamReportsLength) {
  IatConfig config{1e6, 0.0, 1.0, 10, 0.1};
  RandomSource rng(4, 0);
  IatOutcome outcome = *RunIat(config, FromVector({-1.0, -1.0, -1.0}), rng);
  EXPECT_FALSE(outcome.halted);
  EXPECT_EQ(outcome.stop_index, 3);
}

TEST(RunIatTest, PullsNothingPastHalt) {
  IatConfig config{1e6, 0.0, 1.0, 10, 0.1};
  RandomSource rng(5, 0);
  int pulled = 0;
  IatOutcome outcome =
      *RunIat(config, FromVector({-1, -1, 1, 1, 1, 1}, &pulled), rng);
  EXPECT_EQ(outcome.stop_index, 3);
  EXPECT_EQ(pulled, 3);
}

TEST(RunIatTest, PropagatesStreamErrors) {
  IatConfig config{1.0, 0.0, 1.0, 5, 0.1};
  RandomSource rng(6, 0);
  QueryStream failing = [](int) -> absl::StatusOr<std::optional<double>> {
    return absl::InternalError("solver broke");
  };
  EXPECT_EQ(RunIat(config, failing, rng).status().code(),
            StatusCode::kInternal);
}

TEST(RunIatTest, RejectsBadConfig) {
  RandomSource rng(7, 0);
  EXPECT_FALSE(RunIat({0.0, 0.0, 1.0, 1, 0.1}, FromVector({0}), rng).ok());
  EXPECT_FALSE(RunIat({1.0, 0.0, 0.0, 1, 0.1}, FromVector({0}), rng).ok());
  EXPECT_FALSE(RunIat({1.0, 0.0, 1.0, -1, 0.1}, FromVector({0}), rng).ok());
}

TEST(IatEpsilonForTest, ReferenceValue) {
  const double delta = std::pow(std::sqrt(1 / 0.005) + 1, 2) / 1e5;
  EXPECT_NEAR(*IatEpsilonFor(delta, 1000, 0.1, 0.05), 7.266284564132980,
              1e-12);
}

TEST(IatEpsilonForTest, ZeroSensitivityAndAlphaScaling) {
  EXPECT_EQ(*IatEpsilonFor(0.0, 100, 0.1, 0.05), 0.0);
  const double a = *IatEpsilonFor(0.003, 100, 0.1, 0.05);
  const double b = *IatEpsilonFor(0.003, 100, 0.1, 0.1);
  EXPECT_DOUBLE_EQ(a, 2 * b);
  EXPECT_FALSE(IatEpsilonFor(0.003, 0, 0.1, 0.1).ok());
  EXPECT_FALSE(IatEpsilonFor(0.003, 10, 1.0, 0.1).ok());
  EXPECT_FALSE(IatEpsilonFor(0.003, 10, 0.1, 0.0).ok());
}

TEST(IatAccuracyMarginTest, HalfAlphaAtCalibratedEpsilon) {
  const double eps = *IatEpsilonFor(0.002, 500, 0.1, 0.08);
  EXPECT_NEAR(*IatAccuracyMargin(eps, 0.002, 500, 0.1), 0.04, 1e-15);
}

// With the calibrated eps_A and threshold -alpha/2, halting on a query whose
// value is below -alpha happens with probability at most gamma.
TEST(RunIatTest, CalibratedAccuracy) {
  constexpr double kDelta = 0.01;
  constexpr double kAlpha = 0.2;
  constexpr double kGamma = 0.1;
  constexpr int kT = 50;
  IatConfig config{*IatEpsilonFor(kDelta, kT, kGamma, kAlpha), -kAlpha / 2,
                   kDelta, kT, kGamma};
  // Bad queries first, then a good one at the end.
  std::vector<double> values(kT, -1.05 * kAlpha);
  values.back() = 0.0;
  RandomSource rng(8, 0);
  constexpr int kRuns = 2000;
  int bad = 0;
  for (int run = 0; run < kRuns; ++run) {
    IatOutcome outcome = *RunIat(config, FromVector(values), rng);
    if (outcome.halted && values[outcome.stop_index - 1] < -kAlpha) ++bad;
  }
  EXPECT_LE(static_cast<double>(bad) / kRuns, kGamma);
}

}  // namespace
}  // namespace expost
