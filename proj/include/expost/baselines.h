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

#ifndef EXPOST_BASELINES_H_
#define EXPOST_BASELINES_H_

#include <functional>
#include <vector>

#include "absl/status/statusor.h"
#include "expost/accountant.h"
#include "expost/mechanisms.h"
#include "expost/random.h"

namespace expost {

// An eps-DP hypothesis generator; every call must use fresh noise.
using PrivateMechanism =
    std::function<absl::StatusOr<Hypothesis>(double eps, RandomSource& rng)>;

// Covariance perturbation / logistic output perturbation bound to a problem.
// The problem must outlive the returned mechanism.
PrivateMechanism CovariancePerturbMechanism(const RidgeProblem& problem);
PrivateMechanism OutputPerturbLogisticMechanism(const LogisticProblem& problem);

struct DoublingStep {
  int k = 0;
  double eps = 0.0;
  double noisy_value = 0.0;  // f_k(D) + w_k
};

struct DoublingRun {
  DoublingSchedule schedule;
  double per_test_eps = 0.0;  // 2 Delta ln(T / gamma) / alpha
  std::vector<DoublingStep> trace;
  PipelineResult result;
};

// ceil(log2(eps_max / eps_start)), at least 1.
absl::StatusOr<int> DoublingSteps(double eps_start, double eps_max);

// Runs the mechanism at eps_start, 2 eps_start, ... with a fresh
// Laplace-noised excess-risk test after each step; halts when the noisy
// value reaches -alpha/2. Hypotheses outside the problem's M-ball are scaled
// onto it before testing.
absl::StatusOr<DoublingRun> RunDoubling(const ErmProblem& problem,
                                        const DoublingSchedule& schedule,
                                        const PrivateMechanism& mechanism,
                                        const PipelineOptions& options,
                                        RandomSource& rng);

}  // namespace expost

#endif  // EXPOST_BASELINES_H_
