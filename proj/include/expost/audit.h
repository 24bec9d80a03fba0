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

// Empirical differential-privacy audits: sample a scalar mechanism on two
// neighboring inputs, histogram both output distributions on a shared
// binning, and report the largest absolute log ratio of bin frequencies.

#ifndef EXPOST_AUDIT_H_
#define EXPOST_AUDIT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "expost/random.h"

namespace expost {

using ScalarSampler = std::function<absl::StatusOr<double>(RandomSource&)>;

struct HistogramAuditOptions {
  int bins = 50;
  double lo = -1.0;
  double hi = 2.0;
  int64_t samples = 1000000;
  // Bins where either side has fewer samples are skipped; their ratios are
  // dominated by sampling noise.
  int64_t min_count = 1000;
  double epsilon = 1.0;
  double slack = 0.1;
  uint64_t seed = 1;
};

struct HistogramAuditResult {
  double max_log_ratio = 0.0;
  int bins_compared = 0;
  // max_log_ratio <= epsilon + slack.
  bool within_bound = false;
};

// Values outside [lo, hi] are clamped into the edge bins.
absl::StatusOr<HistogramAuditResult> HistogramAudit(
    const ScalarSampler& first, const ScalarSampler& second,
    const HistogramAuditOptions& options);

struct AuditCase {
  std::string name;
  bool expect_violation = false;
  HistogramAuditResult result;

  bool ok() const { return result.within_bound != expect_violation; }
};

// Laplace mechanism at eps = 1 on inputs 0 and 1, the same with the scale
// halved (must be flagged), covariance perturbation on two one-row datasets
// and logistic output perturbation in one dimension.
absl::StatusOr<std::vector<AuditCase>> RunAuditSuite(int64_t samples,
                                                     uint64_t seed);

}  // namespace expost

#endif  // EXPOST_AUDIT_H_
