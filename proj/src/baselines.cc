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

#include "expost/baselines.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/laplace.h"
#include "expost/status_macros.h"

namespace expost {

PrivateMechanism CovariancePerturbMechanism(const RidgeProblem& problem) {
  return [&problem](double eps, RandomSource& rng) {
    return CovariancePerturb(problem, eps, rng);
  };
}

PrivateMechanism OutputPerturbLogisticMechanism(
    const LogisticProblem& problem) {
  return [&problem](double eps, RandomSource& rng) {
    return OutputPerturbLogistic(problem, eps, rng);
  };
}

absl::StatusOr<int> DoublingSteps(double eps_start, double eps_max) {
  if (!(eps_start > 0) || !(eps_max > eps_start) || !std::isfinite(eps_max)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 0 < eps_start < eps_max, got %g and %g", eps_start, eps_max));
  }
  return std::max(1, static_cast<int>(std::ceil(std::log2(eps_max / eps_start))));
}

absl::StatusOr<DoublingRun> RunDoubling(const ErmProblem& problem,
                                        const DoublingSchedule& schedule,
                                        const PrivateMechanism& mechanism,
                                        const PipelineOptions& options,
                                        RandomSource& rng) {
  if (schedule.factor != 2.0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "the doubling accounting needs factor 2, got %g", schedule.factor));
  }
  const int steps = schedule.steps;
  const double delta = problem.QuerySensitivity();
  // Validates every accounting argument up front.
  RETURN_IF_ERROR(DoublingLoss(1, delta, steps, options.gamma, options.alpha,
                               schedule.eps_start)
                      .status());

  DoublingRun run;
  run.schedule = schedule;
  run.per_test_eps = DoublingTestLoss(1, delta, steps, options.gamma,
                                      options.alpha);
  const double test_scale =
      options.alpha / (2.0 * std::log(steps / options.gamma));
  const double threshold = -options.alpha / 2;
  const double cap = problem.NormCap();

  int stop = steps + 1;
  std::optional<Hypothesis> halted;
  for (int k = 1; k <= steps; ++k) {
    const double eps = schedule.EpsilonAt(k);
    ASSIGN_OR_RETURN(Hypothesis h, mechanism(eps, rng));
    ProjectToBall(h.theta, cap);
    run.result.hypotheses_generated = k;
    const double value = -problem.ExcessRisk(h.theta) +
                         internal::DrawLaplace(test_scale, rng);
    run.trace.push_back(DoublingStep{k, eps, value});
    if (value >= threshold) {
      stop = k;
      halted = std::move(h);
      break;
    }
  }

  ASSIGN_OR_RETURN(run.result.record,
                   DoublingRecord(stop, delta, steps, options.gamma,
                                  options.alpha, schedule.eps_start));
  if (halted.has_value()) {
    run.result.excess_risk = problem.ExcessRisk(halted->theta);
    run.result.hypothesis = std::move(halted);
  } else if (options.release_nonprivate) {
    run.result.hypothesis = Hypothesis{problem.optimum(), cap};
    run.result.excess_risk = 0.0;
    run.result.released_nonprivate = true;
  }
  return run;
}

}  // namespace expost
