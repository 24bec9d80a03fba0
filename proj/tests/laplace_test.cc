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

#include "expost/laplace.h"

#include <cmath>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "expost/random.h"

namespace expost {
namespace {

using ::absl::StatusCode;

TEST(LaplacePdfTest, DensityAtZero) {
  EXPECT_DOUBLE_EQ(LaplacePdf(0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(LaplacePdf(1.0, 2.0), std::exp(-0.5) / 4.0);
}

TEST(SampleLaplaceTest, VarianceAtScaleTwo) {
  RandomSource rng(11, 0);
  constexpr int kDraws = 100000;
  double sum_sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    absl::StatusOr<double> z = SampleLaplace(2.0, rng);
    ASSERT_TRUE(z.ok());
    sum_sq += *z * *z;
  }
  EXPECT_NEAR(sum_sq / kDraws, 8.0, 0.4);
}

TEST(SampleLaplaceTest, IdenticalSourcesGiveIdenticalDraws) {
  RandomSource a(99, 4);
  RandomSource b(99, 4);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(*SampleLaplace(1.5, a), *SampleLaplace(1.5, b));
  }
}

TEST(SampleLaplaceTest, RejectsBadScale) {
  RandomSource rng(1, 0);
  EXPECT_EQ(SampleLaplace(0.0, rng).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleLaplace(-1.0, rng).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleLaplace(INFINITY, rng).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleLaplace(NAN, rng).status().code(),
            StatusCode::kInvalidArgument);
}

TEST(SampleLaplaceTest, MedianAbsoluteValueIsScaleLogTwo) {
  RandomSource rng(12, 0);
  constexpr int kDraws = 100000;
  int below = 0;
  for (int i = 0; i < kDraws; ++i) {
    below += std::abs(*SampleLaplace(1.0, rng)) < std::log(2.0);
  }
  // P(|Z| < b ln 2) = 1/2.
  EXPECT_NEAR(static_cast<double>(below) / kDraws, 0.5, 0.005);
}

TEST(PrivacyGridTest, Validation) {
  EXPECT_TRUE(PrivacyGrid::Create({0.1, 0.2, 0.4}).ok());
  EXPECT_EQ(PrivacyGrid::Create({}).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(PrivacyGrid::Create({0.2, 0.1}).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(PrivacyGrid::Create({0.1, 0.1}).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(PrivacyGrid::Create({0.0, 0.1}).status().code(),
            StatusCode::kInvalidArgument);
  EXPECT_EQ(PrivacyGrid::Create({0.1, INFINITY}).status().code(),
            StatusCode::kInvalidArgument);
}

TEST(PrivacyGridTest, AccessorsAndScaling) {
  PrivacyGrid grid = *PrivacyGrid::Create({0.1, 0.2, 0.4});
  EXPECT_EQ(grid.size(), 3);
  EXPECT_DOUBLE_EQ(grid.Level(1), 0.1);
  EXPECT_DOUBLE_EQ(grid.Level(3), 0.4);
  EXPECT_DOUBLE_EQ(grid.min(), 0.1);
  EXPECT_DOUBLE_EQ(grid.max(), 0.4);
  PrivacyGrid half = grid.Scaled(0.5);
  EXPECT_DOUBLE_EQ(half.Level(2), 0.1);
}

TEST(NoiseReduceTest, SingleLevelIsOneLaplaceDraw) {
  PrivacyGrid grid = *PrivacyGrid::Create({0.5});
  RandomSource rng(21, 0);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(4, 3.0);
  constexpr int kChains = 25000;
  double sum_sq = 0;
  for (int i = 0; i < kChains; ++i) {
    NoiseChain chain = *NoiseReduce(v, 1.0, grid, rng);
    ASSERT_EQ(chain.values.size(), 1u);
    sum_sq += (chain.values[0] - v).squaredNorm();
  }
  // 2 (delta / eps)^2 = 8 per coordinate.
  EXPECT_NEAR(sum_sq / (4.0 * kChains), 8.0, 0.4);
}

TEST(NoiseReduceTest, ChainShape) {
  PrivacyGrid grid = *PrivacyGrid::Create({0.1, 0.3, 0.9});
  RandomSource rng(1, 0);
  Eigen::VectorXd v(2);
  v << 1.0, -1.0;
  NoiseChain chain = *NoiseReduce(v, 2.0, grid, rng);
  ASSERT_EQ(chain.values.size(), 3u);
  ASSERT_EQ(chain.scales.size(), 3u);
  EXPECT_DOUBLE_EQ(chain.sensitivity, 2.0);
  EXPECT_DOUBLE_EQ(chain.scales[0], 2.0 / 0.1);
  EXPECT_DOUBLE_EQ(chain.scales[2], 2.0 / 0.9);
  for (const Eigen::VectorXd& value : chain.values) EXPECT_EQ(value.size(), 2);
}

TEST(NoiseReduceTest, ZeroSensitivityCopiesInput) {
  PrivacyGrid grid = *PrivacyGrid::Create({0.1, 0.3, 0.9});
  RandomSource rng(1, 0);
  Eigen::VectorXd v(3);
  v << 0.25, -4.0, 7.5;
  NoiseChain chain = *NoiseReduce(v, 0.0, grid, rng);
  for (const Eigen::VectorXd& value : chain.values) {
    EXPECT_EQ(value, v);
  }
}

TEST(NoiseReduceTest, RejectsNegativeSensitivity) {
  PrivacyGrid grid = *PrivacyGrid::Create({1.0});
  RandomSource rng(1, 0);
  EXPECT_EQ(NoiseReduce(Eigen::VectorXd::Zero(1), -1.0, grid, rng)
                .status()
                .code(),
            StatusCode::kInvalidArgument);
}

TEST(NoiseReduceTest, SameSeedSameChain) {
  PrivacyGrid grid = *PrivacyGrid::Create({0.2, 0.4, 0.8, 1.6});
  RandomSource a(5, 9);
  RandomSource b(5, 9);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(6, -1, 1);
  NoiseChain x = *NoiseReduce(v, 1.0, grid, a);
  NoiseChain y = *NoiseReduce(v, 1.0, grid, b);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(x.values[t], y.values[t]);
}

// Marginal variance per level and copy frequency between adjacent levels.
TEST(NoiseReduceTest, MarginalsAndCopyFrequency) {
  const std::vector<double> eps = {0.25, 0.5, 0.8, 1.5, 2.0};
  PrivacyGrid grid = *PrivacyGrid::Create(eps);
  RandomSource rng(31, 0);
  constexpr int kChains = 40000;
  std::vector<double> sum_sq(eps.size(), 0.0);
  std::vector<int> copies(eps.size() - 1, 0);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(1, -2.0);
  for (int i = 0; i < kChains; ++i) {
    NoiseChain chain = *NoiseReduce(v, 1.0, grid, rng);
    for (size_t t = 0; t < eps.size(); ++t) {
      const double d = chain.values[t](0) - v(0);
      sum_sq[t] += d * d;
    }
    for (size_t t = 0; t + 1 < eps.size(); ++t) {
      copies[t] += chain.values[t](0) == chain.values[t + 1](0);
    }
  }
  for (size_t t = 0; t < eps.size(); ++t) {
    const double expected = 2.0 / (eps[t] * eps[t]);
    EXPECT_NEAR(sum_sq[t] / kChains, expected, 0.08 * expected) << "t=" << t;
  }
  for (size_t t = 0; t + 1 < eps.size(); ++t) {
    const double q = std::pow(eps[t] / eps[t + 1], 2);
    const double sigma = std::sqrt(q * (1 - q) / kChains);
    EXPECT_NEAR(static_cast<double>(copies[t]) / kChains, q, 3.5 * sigma)
        << "t=" << t;
  }
}

// Mean Euclidean norm of an i.i.d. Lap(r) vector stays below sqrt(2k) r.
TEST(LaplaceVectorTest, MeanNormBound) {
  RandomSource rng(41, 0);
  for (int k : {1, 3, 10, 50}) {
    for (double r : {0.1, 1.0, 4.0}) {
      constexpr int kDraws = 4000;
      double total = 0;
      for (int i = 0; i < kDraws; ++i) {
        double sq = 0;
        for (int j = 0; j < k; ++j) {
          const double z = *SampleLaplace(r, rng);
          sq += z * z;
        }
        total += std::sqrt(sq);
      }
      EXPECT_LE(total / kDraws, std::sqrt(2.0 * k) * r * 1.01)
          << "k=" << k << " r=" << r;
    }
  }
}

}  // namespace
}  // namespace expost
