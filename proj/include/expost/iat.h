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

// AboveThreshold over a lazily generated stream of data-dependent queries.
//
// The queries are pulled one at a time, so nothing past the halting point is
// ever computed. When the stream is prefix-private at levels eps_1..eps_T,
// halting at t costs eps_A + eps_t ex post.

#ifndef EXPOST_IAT_H_
#define EXPOST_IAT_H_

#include <functional>
#include <optional>

#include "absl/status/statusor.h"
#include "expost/random.h"

namespace expost {

struct IatConfig {
  double eps_a = 0.0;       // privacy loss of the test itself
  double threshold = 0.0;   // W
  double sensitivity = 0.0; // l1 sensitivity of every query
  int max_queries = 0;      // T
  double gamma = 0.1;       // failure probability used for calibration

  absl::Status Validate() const;
};

// Produces the value of query t (1-based) on the private data, or nullopt
// when the stream is exhausted.
using QueryStream =
    std::function<absl::StatusOr<std::optional<double>>(int t)>;

struct IatOutcome {
  // Index of the halting query; on bottom, the number of queries consumed.
  int stop_index = 0;
  bool halted = false;
};

// Draws the noisy threshold W + Lap(2 delta / eps_A) once, then adds fresh
// Lap(4 delta / eps_A) to every query value and halts on the first one that
// reaches it. Errors from the stream are propagated unchanged.
absl::StatusOr<IatOutcome> RunIat(const IatConfig& config,
                                  const QueryStream& queries,
                                  RandomSource& rng);

// eps_A that makes the test (alpha / 2, gamma)-accurate over T queries:
// 16 delta ln(2T / gamma) / alpha.
absl::StatusOr<double> IatEpsilonFor(double delta, int max_queries,
                                     double gamma, double alpha);

// Accuracy margin of the test at privacy loss eps:
// 8 delta (ln T + ln(2 / gamma)) / eps.
absl::StatusOr<double> IatAccuracyMargin(double eps, double delta,
                                         int max_queries, double gamma);

}  // namespace expost

#endif  // EXPOST_IAT_H_
