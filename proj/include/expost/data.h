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

#ifndef EXPOST_DATA_H_
#define EXPOST_DATA_H_

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace expost {

enum class Task { kRegression, kClassification };

absl::StatusOr<Task> ParseTask(const std::string& name);
std::string TaskName(Task task);

// Rows of X may be scaled with any l1 norm until the dataset is finalized.
// A finalized dataset guarantees ||X_i||_1 <= 1 for every row, and
// |y_i| <= 1 (regression) or y_i in {-1, +1} (classification). Every
// sensitivity bound in the library assumes those guarantees, so the
// mechanisms only accept finalized datasets.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
          std::vector<std::string> feature_names, std::string provenance);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  Task task() const { return task_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const std::string& provenance() const { return provenance_; }
  bool finalized() const { return finalized_; }
  int n() const { return static_cast<int>(x_.rows()); }
  int p() const { return static_cast<int>(x_.cols()); }

  // Returns a copy with row `i` replaced; the copy keeps this dataset's
  // finalization state only if the new row satisfies the norm bounds.
  Dataset WithRow(int i, const Eigen::VectorXd& row, double label) const;

 private:
  friend absl::StatusOr<Dataset> Finalize(Dataset dataset);

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Task task_;
  std::vector<std::string> feature_names_;
  std::string provenance_;
  bool finalized_ = false;
};

// Slack allowed on the row-norm bound for floating-point rounding.
inline constexpr double kNormSlack = 1e-12;

// Checks the finalized-dataset invariants without modifying anything.
absl::Status ValidateNorms(const Dataset& dataset);

// Marks a dataset as finalized after validating it. Classification labels
// in {0, 1} are mapped to {-1, +1} first.
absl::StatusOr<Dataset> Finalize(Dataset dataset);

// Error unless `dataset` is finalized; used by every mechanism entry point.
absl::Status RequireFinalized(const Dataset& dataset);

// Column selection for CSV ingestion. Columns are named by header or by
// zero-based index. An empty feature list selects every column other than
// the label and the dropped ones.
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column;
  std::vector<std::string> drop_columns;
  Task task = Task::kRegression;
};

absl::StatusOr<Dataset> ParseCsv(std::istream& in, const CsvSchema& schema,
                                 const std::string& provenance);
absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvSchema& schema);

// Writes a headered CSV with the features followed by a "label" column.
// Values are printed with 17 significant digits so they reload exactly.
absl::Status WriteCsv(const Dataset& dataset, const std::string& path);

// Applies x -> ln(1 + x) to the named feature columns (header name or
// index) and, if `label` is set, to the labels. Negative inputs are
// rejected. The result is not finalized.
absl::StatusOr<Dataset> TransformLog1p(const Dataset& dataset,
                                       const std::vector<std::string>& columns,
                                       bool label);

// Divides X by its largest row l1 norm and, for regression, y by its
// largest absolute value, then finalizes. Not a private operation.
absl::StatusOr<Dataset> RenormalizeL1(const Dataset& dataset);

// Synthetic regression data: theta0 uniform on the unit sphere, features
// uniform on [-1, 1] then l1-renormalized, labels Xtheta0 scaled to
// [-1, 1] plus N(0, noise_level^2), rescaled into [-1, 1].
absl::StatusOr<Dataset> SynthRidge(int n, int p, double noise_level,
                                   uint64_t seed);

// Synthetic classification data with labels
// sign(margin * s_i + Logistic(0, 1)), where s = Xtheta0 scaled to [-1, 1].
absl::StatusOr<Dataset> SynthLogistic(int n, int p, double margin,
                                      uint64_t seed);

}  // namespace expost

#endif  // EXPOST_DATA_H_
