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

// Laplace sampling and the correlated noise-reduction chain.
//
// NoiseReduce releases a sequence of Laplace-perturbed copies of a vector at
// increasing privacy levels eps_1 < ... < eps_T. Every prefix
// (v_1, ..., v_t) carries only the privacy cost of its last element eps_t,
// because the noisier elements are generated backwards from the less noisy
// ones as a Markov chain whose marginal at level t is Lap(delta / eps_t)
// around the input.

#ifndef EXPOST_LAPLACE_H_
#define EXPOST_LAPLACE_H_

#include <span>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "expost/random.h"

namespace expost {

// A strictly increasing, positive list of privacy levels. Levels are
// addressed 1-based through Level(t) to match stopping indices.
class PrivacyGrid {
 public:
  static absl::StatusOr<PrivacyGrid> Create(std::vector<double> epsilons);

  int size() const { return static_cast<int>(epsilons_.size()); }
  double Level(int t) const { return epsilons_[t - 1]; }
  double min() const { return epsilons_.front(); }
  double max() const { return epsilons_.back(); }
  std::span<const double> epsilons() const { return epsilons_; }

  // Every level multiplied by `factor` (> 0).
  PrivacyGrid Scaled(double factor) const;

 private:
  explicit PrivacyGrid(std::vector<double> epsilons)
      : epsilons_(std::move(epsilons)) {}

  std::vector<double> epsilons_;
};

// Laplace density with location 0.
double LaplacePdf(double z, double scale);

// One Lap(scale) draw by inverse CDF. Rejects non-positive or non-finite
// scales.
absl::StatusOr<double> SampleLaplace(double scale, RandomSource& rng);

namespace internal {
// Unchecked inverse-CDF draw; `scale` may be zero, which yields exactly 0.
double DrawLaplace(double scale, RandomSource& rng);
}  // namespace internal

// Output of NoiseReduce. values[t - 1] is the release at grid level t.
struct NoiseChain {
  std::vector<Eigen::VectorXd> values;
  std::vector<double> scales;  // delta / eps_t, per level
  double sensitivity = 0.0;
  PrivacyGrid levels;
};

// Runs the backward noise-reduction chain on `v`. The top level gets fresh
// Lap(delta / eps_T) noise per coordinate; going down, each coordinate is
// copied from the level above with probability (eps_t / eps_{t+1})^2 and
// otherwise receives additional Lap(delta / eps_t) noise. The copy coin is
// flipped per coordinate.
absl::StatusOr<NoiseChain> NoiseReduce(const Eigen::VectorXd& v, double delta,
                                       const PrivacyGrid& grid,
                                       RandomSource& rng);

}  // namespace expost

#endif  // EXPOST_LAPLACE_H_
