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

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace expost {

absl::StatusOr<PrivacyGrid> PrivacyGrid::Create(std::vector<double> epsilons) {
  if (epsilons.empty()) {
    return absl::InvalidArgumentError("privacy grid must be nonempty");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!std::isfinite(epsilons[i]) || epsilons[i] <= 0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "privacy level %d must be finite and positive, got %g", i + 1,
          epsilons[i]));
    }
    if (i > 0 && epsilons[i] <= epsilons[i - 1]) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "privacy grid must be strictly increasing: level %d (%g) <= "
          "level %d (%g)",
          i + 1, epsilons[i], i, epsilons[i - 1]));
    }
  }
  return PrivacyGrid(std::move(epsilons));
}

PrivacyGrid PrivacyGrid::Scaled(double factor) const {
  std::vector<double> scaled(epsilons_);
  for (double& eps : scaled) eps *= factor;
  return PrivacyGrid(std::move(scaled));
}

double LaplacePdf(double z, double scale) {
  return std::exp(-std::abs(z) / scale) / (2.0 * scale);
}

namespace internal {

double DrawLaplace(double scale, RandomSource& rng) {
  // u in (0, 1) so |u - 1/2| < 1/2 and the log argument stays positive.
  const double centered = rng.NextOpenUniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(centered));
  return centered < 0 ? -magnitude : magnitude;
}

}  // namespace internal

absl::StatusOr<double> SampleLaplace(double scale, RandomSource& rng) {
  if (!std::isfinite(scale) || scale <= 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Laplace scale must be finite and positive, got %g", scale));
  }
  return internal::DrawLaplace(scale, rng);
}

absl::StatusOr<NoiseChain> NoiseReduce(const Eigen::VectorXd& v, double delta,
                                       const PrivacyGrid& grid,
                                       RandomSource& rng) {
  if (!std::isfinite(delta) || delta < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sensitivity must be finite and nonnegative, got %g", delta));
  }
  const int levels = grid.size();
  std::vector<double> scales(levels);
  for (int t = 1; t <= levels; ++t) scales[t - 1] = delta / grid.Level(t);

  std::vector<Eigen::VectorXd> values(levels, v);
  if (delta == 0) {
    return NoiseChain{std::move(values), std::move(scales), delta, grid};
  }

  Eigen::VectorXd& top = values[levels - 1];
  for (Eigen::Index i = 0; i < top.size(); ++i) {
    top[i] += internal::DrawLaplace(scales[levels - 1], rng);
  }
  for (int t = levels - 1; t >= 1; --t) {
    const double ratio = grid.Level(t) / grid.Level(t + 1);
    const double copy_probability = ratio * ratio;
    const Eigen::VectorXd& above = values[t];
    Eigen::VectorXd& current = values[t - 1];
    for (Eigen::Index i = 0; i < current.size(); ++i) {
      current[i] = above[i];
      if (rng.NextUniform() >= copy_probability) {
        current[i] += internal::DrawLaplace(scales[t - 1], rng);
      }
    }
  }
  return NoiseChain{std::move(values), std::move(scales), delta, grid};
}

}  // namespace expost
