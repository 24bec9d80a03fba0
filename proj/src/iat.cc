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

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/laplace.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

absl::Status ValidateCalibration(double delta, int max_queries, double gamma,
                                 double alpha) {
  if (!(delta >= 0) || !std::isfinite(delta)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sensitivity must be nonnegative, got %g", delta));
  }
  if (max_queries < 1) {
    return absl::InvalidArgumentError("need at least one query");
  }
  if (!(gamma > 0 && gamma < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1), got %g", gamma));
  }
  if (!(alpha > 0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be positive, got %g", alpha));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status IatConfig::Validate() const {
  if (!(eps_a > 0) || !std::isfinite(eps_a)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps_A must be finite and positive, got %g", eps_a));
  }
  if (!(sensitivity > 0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "query sensitivity must be finite and positive, got %g", sensitivity));
  }
  if (max_queries < 0) {
    return absl::InvalidArgumentError("max_queries must be nonnegative");
  }
  if (!std::isfinite(threshold)) {
    return absl::InvalidArgumentError("threshold must be finite");
  }
  return absl::OkStatus();
}

absl::StatusOr<IatOutcome> RunIat(const IatConfig& config,
                                  const QueryStream& queries,
                                  RandomSource& rng) {
  RETURN_IF_ERROR(config.Validate());
  const double noisy_threshold =
      config.threshold +
      internal::DrawLaplace(2.0 * config.sensitivity / config.eps_a, rng);
  const double query_scale = 4.0 * config.sensitivity / config.eps_a;

  int consumed = 0;
  for (int t = 1; t <= config.max_queries; ++t) {
    ASSIGN_OR_RETURN(std::optional<double> value, queries(t));
    if (!value.has_value()) break;
    consumed = t;
    if (*value + internal::DrawLaplace(query_scale, rng) >= noisy_threshold) {
      return IatOutcome{t, true};
    }
  }
  return IatOutcome{consumed, false};
}

absl::StatusOr<double> IatEpsilonFor(double delta, int max_queries,
                                     double gamma, double alpha) {
  RETURN_IF_ERROR(ValidateCalibration(delta, max_queries, gamma, alpha));
  return 16.0 * delta * std::log(2.0 * max_queries / gamma) / alpha;
}

absl::StatusOr<double> IatAccuracyMargin(double eps, double delta,
                                         int max_queries, double gamma) {
  if (!(eps > 0)) {
    return absl::InvalidArgumentError("eps must be positive");
  }
  if (!(delta >= 0) || max_queries < 1 || !(gamma > 0 && gamma < 1)) {
    return absl::InvalidArgumentError("invalid accuracy-margin parameters");
  }
  return 8.0 * delta *
         (std::log(static_cast<double>(max_queries)) + std::log(2.0 / gamma)) /
         eps;
}

}  // namespace expost
