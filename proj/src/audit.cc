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

#include "expost/audit.h"

#include <algorithm>
#include <cmath>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/data.h"
#include "expost/laplace.h"
#include "expost/mechanisms.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

absl::StatusOr<std::vector<int64_t>> Histogram(const ScalarSampler& sampler,
                                               const HistogramAuditOptions& o,
                                               RandomSource& rng) {
  std::vector<int64_t> counts(o.bins, 0);
  const double width = (o.hi - o.lo) / o.bins;
  for (int64_t i = 0; i < o.samples; ++i) {
    ASSIGN_OR_RETURN(double value, sampler(rng));
    const int bin = static_cast<int>(
        std::clamp(std::floor((value - o.lo) / width), 0.0, o.bins - 1.0));
    ++counts[bin];
  }
  return counts;
}

absl::StatusOr<Dataset> OneRow(double x, double y, Task task) {
  return Finalize(Dataset(Eigen::MatrixXd::Constant(1, 1, x),
                          Eigen::VectorXd::Constant(1, y), task, {"x"},
                          "audit"));
}

}  // namespace

absl::StatusOr<HistogramAuditResult> HistogramAudit(
    const ScalarSampler& first, const ScalarSampler& second,
    const HistogramAuditOptions& options) {
  if (options.bins < 1 || !(options.hi > options.lo) ||
      options.samples < 1) {
    return absl::InvalidArgumentError("invalid histogram audit options");
  }
  RandomSource rng_first(options.seed, 1);
  RandomSource rng_second(options.seed, 2);
  ASSIGN_OR_RETURN(std::vector<int64_t> a,
                   Histogram(first, options, rng_first));
  ASSIGN_OR_RETURN(std::vector<int64_t> b,
                   Histogram(second, options, rng_second));

  HistogramAuditResult result;
  for (int i = 0; i < options.bins; ++i) {
    if (a[i] < options.min_count || b[i] < options.min_count) continue;
    ++result.bins_compared;
    const double ratio = std::abs(std::log(static_cast<double>(a[i]) / b[i]));
    result.max_log_ratio = std::max(result.max_log_ratio, ratio);
  }
  if (result.bins_compared == 0) {
    return absl::FailedPreconditionError(
        "no histogram bin has enough samples on both sides");
  }
  result.within_bound =
      result.max_log_ratio <= options.epsilon + options.slack;
  return result;
}

absl::StatusOr<std::vector<AuditCase>> RunAuditSuite(int64_t samples,
                                                     uint64_t seed) {
  std::vector<AuditCase> cases;
  HistogramAuditOptions options;
  options.samples = samples;
  options.seed = seed;
  // Keep the same per-bin count floor relative to the sample size.
  options.min_count = std::max<int64_t>(100, samples / 1000);

  auto laplace_at = [](double center, double scale) -> ScalarSampler {
    return [center, scale](RandomSource& rng) -> absl::StatusOr<double> {
      return center + internal::DrawLaplace(scale, rng);
    };
  };

  {
    ASSIGN_OR_RETURN(HistogramAuditResult r,
                     HistogramAudit(laplace_at(0, 1), laplace_at(1, 1),
                                    options));
    cases.push_back({"laplace", false, r});
  }
  {
    ASSIGN_OR_RETURN(HistogramAuditResult r,
                     HistogramAudit(laplace_at(0, 0.5), laplace_at(1, 0.5),
                                    options));
    cases.push_back({"laplace-half-scale", true, r});
  }
  {
    // One row (1, 1) against (1, -1): X'y moves by 2.
    constexpr double kLambda = 1.0;
    ASSIGN_OR_RETURN(Dataset d1, OneRow(1.0, 1.0, Task::kRegression));
    ASSIGN_OR_RETURN(Dataset d2, OneRow(1.0, -1.0, Task::kRegression));
    ASSIGN_OR_RETURN(RidgeProblem p1, RidgeProblem::Create(d1, kLambda));
    ASSIGN_OR_RETURN(RidgeProblem p2, RidgeProblem::Create(d2, kLambda));
    auto sampler = [](const RidgeProblem& p) -> ScalarSampler {
      return [&p](RandomSource& rng) -> absl::StatusOr<double> {
        ASSIGN_OR_RETURN(Hypothesis h, CovariancePerturb(p, 1.0, rng));
        return h.theta[0];
      };
    };
    HistogramAuditOptions o = options;
    o.lo = -RidgeNormCap(kLambda);
    o.hi = RidgeNormCap(kLambda);
    ASSIGN_OR_RETURN(HistogramAuditResult r,
                     HistogramAudit(sampler(p1), sampler(p2), o));
    cases.push_back({"covariance-perturbation", false, r});
  }
  {
    constexpr double kLambda = 1.0;
    ASSIGN_OR_RETURN(Dataset d1, OneRow(1.0, 1.0, Task::kClassification));
    ASSIGN_OR_RETURN(Dataset d2, OneRow(1.0, -1.0, Task::kClassification));
    ASSIGN_OR_RETURN(LogisticProblem p1, LogisticProblem::Create(d1, kLambda));
    ASSIGN_OR_RETURN(LogisticProblem p2, LogisticProblem::Create(d2, kLambda));
    auto sampler = [](const LogisticProblem& p) -> ScalarSampler {
      return [&p](RandomSource& rng) -> absl::StatusOr<double> {
        ASSIGN_OR_RETURN(Hypothesis h, OutputPerturbLogistic(p, 1.0, rng));
        return h.theta[0];
      };
    };
    ASSIGN_OR_RETURN(double scale, LogisticSolutionSensitivity(kLambda, 1, 1));
    HistogramAuditOptions o = options;
    o.lo = -1.5 * scale;
    o.hi = 1.5 * scale;
    ASSIGN_OR_RETURN(HistogramAuditResult r,
                     HistogramAudit(sampler(p1), sampler(p2), o));
    cases.push_back({"logistic-output-perturbation", false, r});
  }
  return cases;
}

}  // namespace expost
