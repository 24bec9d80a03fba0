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

// Trial sweeps over (approach, alpha, trial) with per-trial derived seeds,
// line-delimited JSON records and a CSV summary.

#ifndef EXPOST_EXPERIMENT_H_
#define EXPOST_EXPERIMENT_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "expost/data.h"
#include "expost/laplace.h"
#include "expost/mechanisms.h"

namespace expost {

enum class Approach { kNoiseReduction, kDoubling, kTheory, kFixedEps };

absl::StatusOr<Approach> ParseApproach(std::string_view name);
std::string ApproachName(Approach approach);

struct SyntheticSpec {
  int n = 5000;
  int p = 5;
  // Label noise level (regression) or margin (classification).
  double noise = 0.1;
  uint64_t seed = 1;
};

struct CsvSource {
  std::string path;
  CsvSchema schema;
  std::vector<std::string> log1p_columns;
  bool log1p_label = false;
};

struct GridSpec {
  int steps = 1000;
  // Unset means automatic: 1/n and 4 times the theory epsilon.
  std::optional<double> eps_min;
  std::optional<double> eps_max;
};

struct ExperimentConfig {
  std::optional<SyntheticSpec> synthetic;
  std::optional<CsvSource> csv;
  Task task = Task::kRegression;
  double lambda = 0.005;
  std::vector<double> alphas;
  double gamma = 0.1;
  int trials = 1;
  uint64_t seed = 0;
  GridSpec grid;
  std::vector<Approach> approaches;
  // Unset means the method matching the task's mechanism.
  std::optional<TheoryMethod> theory_method;
  double fixed_eps = 1.0;
  bool release_nonprivate = false;
  bool record_timing = false;
  int threads = 0;  // 0: hardware concurrency

  absl::Status Validate() const;
};

// Parses the JSON configuration format documented in the README. Unknown
// keys are rejected.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view text);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// Loads or generates the dataset and finalizes it.
absl::StatusOr<Dataset> LoadExperimentData(const ExperimentConfig& config);

TheoryMethod DefaultTheoryMethod(Task task);

// T points from eps_min to eps_max (both exact), constant ratio, ascending.
absl::StatusOr<PrivacyGrid> BuildGeometricGrid(double eps_min, double eps_max,
                                               int steps);

// Geometric grid on [1/n, 4 * TheoryEpsilon(method, alpha, n, p, lambda)].
absl::StatusOr<PrivacyGrid> BuildGrid(int n, int p, double lambda,
                                      double alpha, TheoryMethod method,
                                      int steps);

uint64_t TrialSeed(uint64_t seed, Approach approach, int alpha_index,
                   int trial);

struct TrialRecord {
  std::string approach;
  double alpha = 0.0;
  int alpha_index = 0;
  int trial = 0;
  std::optional<int> stop_index;  // unset at bottom or on error
  double eps_test = 0.0;
  double eps_generate = 0.0;  // may be +inf
  double eps_total = 0.0;     // may be +inf
  double risk_factor = 1.0;   // may be +inf
  std::optional<double> excess_risk;
  std::optional<double> hypothesis_norm;
  int hypotheses_generated = 0;
  bool released_nonprivate = false;
  std::optional<double> wall_clock_seconds;
  std::optional<std::string> error;

  bool bottom() const { return !error && !std::isfinite(eps_total); }
};

// One JSON object without a trailing newline. Infinite values are written
// as the string "inf".
std::string TrialRecordToJson(const TrialRecord& record);
absl::StatusOr<TrialRecord> ParseTrialRecord(std::string_view line);

// Parses a records file; errors carry the 1-based line number.
absl::StatusOr<std::vector<TrialRecord>> ReadTrialRecords(
    const std::string& path);

struct SummaryRow {
  std::string approach;
  double alpha = 0.0;
  int trials = 0;
  int errors = 0;
  int bottoms = 0;
  int finite = 0;
  double eps_total_mean = 0.0;
  double eps_total_se = 0.0;
  double eps_test_mean = 0.0;
  double eps_generate_mean = 0.0;
  double excess_risk_mean = 0.0;
  double excess_risk_se = 0.0;
  double accurate_fraction = 0.0;  // finite trials with excess risk <= alpha
  double norm_mean = 0.0;
};

// Streaming aggregation per (approach, alpha), in first-seen order. Means
// and standard errors cover finite trials only.
std::vector<SummaryRow> Summarize(const std::vector<TrialRecord>& records);

void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out);

struct ExperimentOutputs {
  std::string records_path;
  std::string summary_path;
  int trials_run = 0;
  int trial_errors = 0;
};

// Runs every (approach, alpha, trial) combination and writes
// `<out_dir>/records.jsonl` and `<out_dir>/summary.csv`. Records are ordered
// by (approach, alpha, trial) regardless of completion order. Individual
// trial failures are recorded and do not stop the sweep.
absl::StatusOr<ExperimentOutputs> RunExperiment(const ExperimentConfig& config,
                                                const Dataset& dataset,
                                                const std::string& out_dir);

}  // namespace expost

#endif  // EXPOST_EXPERIMENT_H_
