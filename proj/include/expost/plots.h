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

// SVG charts over trial records, each with a CSV table of the plotted values:
//
//   eps_total.{svg,csv}   mean ex-post loss per approach vs alpha
//   accuracy.{svg,csv}    mean excess risk per approach vs alpha
//   breakdown.{svg,csv}   mean test / generation loss, stacked
//   norms.{svg,csv}       mean hypothesis l2 norm vs alpha

#ifndef EXPOST_PLOTS_H_
#define EXPOST_PLOTS_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "expost/experiment.h"

namespace expost {

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> error;  // half-width of the error bar; may be empty
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  // Dashed horizontal reference line y = x when set (accuracy chart).
  bool diagonal = false;
};

std::string RenderLineChart(const std::vector<ChartSeries>& series,
                            const ChartOptions& options);

// `lower` and `upper` hold the two stacked segments per (series, x).
std::string RenderStackedBars(const std::vector<ChartSeries>& lower,
                              const std::vector<ChartSeries>& upper,
                              const ChartOptions& options);

// Writes the files listed above and returns their paths. Fails without
// writing anything if there are no records.
absl::StatusOr<std::vector<std::string>> EmitPlots(
    const std::vector<TrialRecord>& records, const std::string& out_dir);
absl::StatusOr<std::vector<std::string>> EmitPlotsFromFile(
    const std::string& records_path, const std::string& out_dir);

}  // namespace expost

#endif  // EXPOST_PLOTS_H_
