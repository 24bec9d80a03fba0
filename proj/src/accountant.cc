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

#include "expost/accountant.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExPostRecord MakeRecord(std::optional<int> stop_index, double eps_test,
                        double eps_generate) {
  ExPostRecord record;
  record.stop_index = stop_index;
  record.eps_test = eps_test;
  record.eps_generate = eps_generate;
  record.eps_total = eps_test + eps_generate;
  record.risk_factor = std::exp(record.eps_total);
  return record;
}

absl::Status ValidateDoublingArgs(int steps, double delta, double gamma,
                                  double alpha, double eps_start) {
  if (steps < 1) {
    return absl::InvalidArgumentError("doubling needs at least one step");
  }
  if (!(delta >= 0) || !(eps_start >= 0) || !(alpha > 0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid doubling parameters: delta=%g alpha=%g eps_start=%g", delta,
        alpha, eps_start));
  }
  if (!(gamma > 0 && gamma < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1), got %g", gamma));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<ExPostRecord> ExPostLoss(std::optional<int> stop_index,
                                        double eps_test,
                                        const PrivacyGrid& grid) {
  if (!(eps_test >= 0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("test-phase loss must be nonnegative, got %g",
                        eps_test));
  }
  if (!stop_index.has_value()) {
    return MakeRecord(std::nullopt, eps_test, kInf);
  }
  if (*stop_index < 1 || *stop_index > grid.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("stop index %d outside [1, %d]", *stop_index,
                        grid.size()));
  }
  return MakeRecord(stop_index, eps_test, grid.Level(*stop_index));
}

absl::StatusOr<DoublingSchedule> DoublingSchedule::Create(double eps_start,
                                                          int steps,
                                                          double factor) {
  if (!(eps_start > 0) || !std::isfinite(eps_start)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps_start must be positive, got %g", eps_start));
  }
  if (steps < 1) {
    return absl::InvalidArgumentError("schedule needs at least one step");
  }
  if (!(factor > 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("growth factor must exceed 1, got %g", factor));
  }
  return DoublingSchedule{eps_start, steps, factor};
}

double DoublingSchedule::EpsilonAt(int k) const {
  return eps_start * std::pow(factor, k - 1);
}

double DoublingTestLoss(int k, double delta, int steps, double gamma,
                        double alpha) {
  return 2.0 * k * delta * std::log(steps / gamma) / alpha;
}

double DoublingGenerateLoss(int k, double eps_start) {
  return (std::ldexp(1.0, k) - 1.0) * eps_start;
}

absl::StatusOr<double> DoublingLoss(int k, double delta, int steps,
                                    double gamma, double alpha,
                                    double eps_start) {
  RETURN_IF_ERROR(
      ValidateDoublingArgs(steps, delta, gamma, alpha, eps_start));
  if (k == steps + 1) return kInf;
  if (k < 1 || k > steps) {
    return absl::InvalidArgumentError(
        absl::StrFormat("doubling step %d outside [1, %d]", k, steps));
  }
  return DoublingTestLoss(k, delta, steps, gamma, alpha) +
         DoublingGenerateLoss(k, eps_start);
}

absl::StatusOr<ExPostRecord> DoublingRecord(int k, double delta, int steps,
                                            double gamma, double alpha,
                                            double eps_start) {
  RETURN_IF_ERROR(
      ValidateDoublingArgs(steps, delta, gamma, alpha, eps_start));
  if (k == steps + 1) {
    return MakeRecord(std::nullopt,
                      DoublingTestLoss(steps, delta, steps, gamma, alpha),
                      kInf);
  }
  if (k < 1 || k > steps) {
    return absl::InvalidArgumentError(
        absl::StrFormat("doubling step %d outside [1, %d]", k, steps));
  }
  return MakeRecord(k, DoublingTestLoss(k, delta, steps, gamma, alpha),
                    DoublingGenerateLoss(k, eps_start));
}

absl::StatusOr<double> DoublingRateOverhead(double r) {
  if (!(r > 0 && r < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rate must lie in (0, 1), got %g", r));
  }
  return 1.0 / (r * (1.0 - r));
}

}  // namespace expost
