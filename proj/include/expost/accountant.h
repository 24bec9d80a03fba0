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

// Ex-post privacy loss for the noise-reduction pipelines and the doubling
// baseline. All logarithms are natural.

#ifndef EXPOST_ACCOUNTANT_H_
#define EXPOST_ACCOUNTANT_H_

#include <optional>

#include "absl/status/statusor.h"
#include "expost/laplace.h"

namespace expost {

// Realized privacy loss of one pipeline outcome. A missing stop_index is the
// "no accurate hypothesis found" outcome, whose loss is infinite.
struct ExPostRecord {
  std::optional<int> stop_index;
  double eps_test = 0.0;
  double eps_generate = 0.0;
  double eps_total = 0.0;
  double risk_factor = 1.0;

  bool bottom() const { return !stop_index.has_value(); }
};

// Loss of halting at `stop_index` (1-based into `grid`) after a test phase
// that cost `eps_test`: eps_test + grid.Level(k), or infinity at bottom.
absl::StatusOr<ExPostRecord> ExPostLoss(std::optional<int> stop_index,
                                        double eps_test,
                                        const PrivacyGrid& grid);

// Geometric schedule eps_k = eps_start * factor^(k-1), k = 1..steps.
struct DoublingSchedule {
  double eps_start = 0.0;
  int steps = 0;
  double factor = 2.0;

  static absl::StatusOr<DoublingSchedule> Create(double eps_start, int steps,
                                                 double factor = 2.0);
  double EpsilonAt(int k) const;
};

// Test-phase part of the doubling loss: 2 k delta ln(T / gamma) / alpha.
double DoublingTestLoss(int k, double delta, int steps, double gamma,
                        double alpha);

// Generation part of the doubling loss: (2^k - 1) eps_start.
double DoublingGenerateLoss(int k, double eps_start);

// Ex-post loss of the doubling baseline halting at step k:
//   2 k delta ln(T / gamma) / alpha + (2^k - 1) eps_start.
// k == T + 1 denotes the fallback outcome and returns infinity.
absl::StatusOr<double> DoublingLoss(int k, double delta, int steps,
                                    double gamma, double alpha,
                                    double eps_start);

// Same accounting as DoublingLoss, split into test and generation phases.
absl::StatusOr<ExPostRecord> DoublingRecord(int k, double delta, int steps,
                                            double gamma, double alpha,
                                            double eps_start);

// Worst-case multiplier over the final level eps* when the per-step growth
// factor is 1/r: 1 / (r (1 - r)). Minimized (= 4) at r = 1/2.
absl::StatusOr<double> DoublingRateOverhead(double r);

}  // namespace expost

#endif  // EXPOST_ACCOUNTANT_H_
