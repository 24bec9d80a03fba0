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

#include "expost/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "expost/random.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

// Splits one CSV record. Double-quoted fields may contain commas; a doubled
// quote inside a quoted field is a literal quote.
std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(absl::StripAsciiWhitespace(field)));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::string(absl::StripAsciiWhitespace(field)));
  return fields;
}

std::optional<double> ParseReal(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

absl::StatusOr<int> ResolveColumn(const std::string& spec,
                                  const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == spec) return static_cast<int>(i);
  }
  if (!spec.empty() &&
      std::all_of(spec.begin(), spec.end(),
                  [](char c) { return absl::ascii_isdigit(c); })) {
    const int index = std::stoi(spec);
    if (index < static_cast<int>(header.size())) return index;
  }
  return absl::InvalidArgumentError(absl::StrFormat(
      "column '%s' matches no header name or index (header has %d columns)",
      spec, header.size()));
}

// Largest l1 row norm of X.
double MaxRowL1(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return 0.0;
  return x.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

absl::StatusOr<Task> ParseTask(const std::string& name) {
  if (name == "regression" || name == "ridge") return Task::kRegression;
  if (name == "classification" || name == "logistic") {
    return Task::kClassification;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown task '", name,
                   "' (expected regression or classification)"));
}

std::string TaskName(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
                 std::vector<std::string> feature_names,
                 std::string provenance)
    : x_(std::move(x)),
      y_(std::move(y)),
      task_(task),
      feature_names_(std::move(feature_names)),
      provenance_(std::move(provenance)) {
  if (feature_names_.size() != static_cast<std::size_t>(x_.cols())) {
    feature_names_.clear();
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      feature_names_.push_back(absl::StrCat("x", j));
    }
  }
}

Dataset Dataset::WithRow(int i, const Eigen::VectorXd& row,
                         double label) const {
  Dataset copy = *this;
  copy.x_.row(i) = row.transpose();
  copy.y_[i] = label;
  copy.finalized_ = finalized_ && ValidateNorms(copy).ok();
  return copy;
}

absl::Status ValidateNorms(const Dataset& dataset) {
  if (dataset.n() == 0 || dataset.p() == 0) {
    return absl::FailedPreconditionError("dataset is empty");
  }
  if (dataset.y().size() != dataset.n()) {
    return absl::FailedPreconditionError(
        absl::StrFormat("%d labels for %d rows", dataset.y().size(),
                        dataset.n()));
  }
  for (int i = 0; i < dataset.n(); ++i) {
    const double norm = dataset.x().row(i).cwiseAbs().sum();
    if (!(norm <= 1.0 + kNormSlack)) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "row %d has l1 norm %.17g > 1; renormalize the data first", i,
          norm));
    }
    const double label = dataset.y()[i];
    if (dataset.task() == Task::kRegression) {
      if (!(std::abs(label) <= 1.0 + kNormSlack)) {
        return absl::FailedPreconditionError(absl::StrFormat(
            "row %d has label %.17g outside [-1, 1]", i, label));
      }
    } else if (label != 1.0 && label != -1.0) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "row %d has class label %g, expected -1 or +1", i, label));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> Finalize(Dataset dataset) {
  if (dataset.task_ == Task::kClassification) {
    const bool has_minus_one = (dataset.y_.array() == -1.0).any();
    const bool has_zero = (dataset.y_.array() == 0.0).any();
    if (has_zero && has_minus_one) {
      return absl::FailedPreconditionError(
          "class labels mix 0 and -1; expected {0, 1} or {-1, +1}");
    }
    if (has_zero) {
      dataset.y_ = (dataset.y_.array() == 0.0).select(-1.0, dataset.y_);
    }
  }
  RETURN_IF_ERROR(ValidateNorms(dataset));
  dataset.finalized_ = true;
  return dataset;
}

absl::Status RequireFinalized(const Dataset& dataset) {
  if (!dataset.finalized()) {
    return absl::FailedPreconditionError(
        "dataset is not finalized; mechanisms need ||X_i||_1 <= 1 and "
        "bounded labels (see RenormalizeL1)");
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ParseCsv(std::istream& in, const CsvSchema& schema,
                                 const std::string& provenance) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(
        absl::StrCat(provenance, ": missing header line"));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = SplitCsvLine(line);

  if (schema.label_column.empty()) {
    return absl::InvalidArgumentError("no label column given");
  }
  ASSIGN_OR_RETURN(const int label_index,
                   ResolveColumn(schema.label_column, header));
  std::set<int> dropped;
  for (const std::string& spec : schema.drop_columns) {
    ASSIGN_OR_RETURN(const int index, ResolveColumn(spec, header));
    dropped.insert(index);
  }
  std::vector<int> features;
  if (schema.feature_columns.empty()) {
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
      if (j != label_index && !dropped.contains(j)) features.push_back(j);
    }
  } else {
    for (const std::string& spec : schema.feature_columns) {
      ASSIGN_OR_RETURN(const int index, ResolveColumn(spec, header));
      if (index == label_index) {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", spec, "' is both feature and label"));
      }
      features.push_back(index);
    }
  }
  if (features.empty()) {
    return absl::InvalidArgumentError("no feature columns selected");
  }

  std::vector<std::string> names;
  for (int j : features) names.push_back(header[j]);

  std::vector<double> cells;
  std::vector<double> labels;
  int line_number = 1;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s: ragged row %d (line %d): %d fields, header has %d", provenance,
          row, line_number, fields.size(), header.size()));
    }
    for (int j : features) {
      std::optional<double> value = ParseReal(fields[j]);
      if (!value.has_value()) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "%s: row %d (line %d), column %d ('%s'): '%s' is not a number",
            provenance, row, line_number, j, header[j], fields[j]));
      }
      cells.push_back(*value);
    }
    std::optional<double> label = ParseReal(fields[label_index]);
    if (!label.has_value()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s: row %d (line %d), label column %d ('%s'): '%s' is not a number",
          provenance, row, line_number, label_index, header[label_index],
          fields[label_index]));
    }
    labels.push_back(*label);
    ++row;
  }
  if (row == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(provenance, ": no data rows"));
  }

  const int p = static_cast<int>(features.size());
  Eigen::MatrixXd x(row, p);
  for (int i = 0; i < row; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = cells[static_cast<std::size_t>(i) * p + j];
  }
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(labels.data(), row);
  return Dataset(std::move(x), std::move(y), schema.task, std::move(names),
                 provenance);
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  }
  return ParseCsv(in, schema, path);
}

absl::Status WriteCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write '", path, "'"));
  }
  out << absl::StrJoin(dataset.feature_names(), ",") << ",label\n";
  for (int i = 0; i < dataset.n(); ++i) {
    for (int j = 0; j < dataset.p(); ++j) {
      out << absl::StrFormat("%.17g,", dataset.x()(i, j));
    }
    out << absl::StrFormat("%.17g\n", dataset.y()[i]);
  }
  if (!out) {
    return absl::DataLossError(absl::StrCat("write to '", path, "' failed"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> TransformLog1p(const Dataset& dataset,
                                       const std::vector<std::string>& columns,
                                       bool label) {
  Eigen::MatrixXd x = dataset.x();
  Eigen::VectorXd y = dataset.y();
  for (const std::string& spec : columns) {
    ASSIGN_OR_RETURN(const int j, ResolveColumn(spec, dataset.feature_names()));
    for (int i = 0; i < dataset.n(); ++i) {
      if (x(i, j) < 0) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "log1p of negative value %g at row %d, column %d ('%s')", x(i, j),
            i, j, dataset.feature_names()[j]));
      }
      x(i, j) = std::log1p(x(i, j));
    }
  }
  if (label) {
    for (int i = 0; i < dataset.n(); ++i) {
      if (y[i] < 0) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "log1p of negative label %g at row %d", y[i], i));
      }
      y[i] = std::log1p(y[i]);
    }
  }
  std::string provenance = dataset.provenance();
  absl::StrAppend(&provenance, "; log1p(", absl::StrJoin(columns, ","),
                  label ? (columns.empty() ? "label" : ",label") : "", ")");
  return Dataset(std::move(x), std::move(y), dataset.task(),
                 dataset.feature_names(), std::move(provenance));
}

absl::StatusOr<Dataset> RenormalizeL1(const Dataset& dataset) {
  const double x_scale = MaxRowL1(dataset.x());
  if (!(x_scale > 0)) {
    return absl::FailedPreconditionError(
        "all feature rows are zero; cannot renormalize");
  }
  Eigen::MatrixXd x = dataset.x() / x_scale;
  Eigen::VectorXd y = dataset.y();
  std::string provenance = dataset.provenance();
  absl::StrAppend(&provenance, absl::StrFormat("; x/=%.17g", x_scale));
  if (dataset.task() == Task::kRegression && y.size() > 0) {
    const double y_scale = y.cwiseAbs().maxCoeff();
    if (y_scale > 0) {
      y /= y_scale;
      absl::StrAppend(&provenance, absl::StrFormat("; y/=%.17g", y_scale));
    }
  }
  return Finalize(Dataset(std::move(x), std::move(y), dataset.task(),
                          dataset.feature_names(), std::move(provenance)));
}

namespace {

struct SyntheticDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd signal;  // X theta0 scaled into [-1, 1]
};

SyntheticDesign DrawDesign(int n, int p, RandomSource& rng) {
  Eigen::VectorXd theta0(p);
  do {
    for (int j = 0; j < p; ++j) theta0[j] = rng.NextGaussian();
  } while (theta0.norm() == 0);
  theta0.normalize();

  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = 2.0 * rng.NextUniform() - 1.0;
  }
  const double x_scale = MaxRowL1(x);
  if (x_scale > 0) x /= x_scale;

  Eigen::VectorXd signal = x * theta0;
  const double s_scale = signal.cwiseAbs().maxCoeff();
  if (s_scale > 0) signal /= s_scale;
  return {std::move(x), std::move(signal)};
}

absl::Status ValidateShape(int n, int p) {
  if (n < 1 || p < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("synthetic data needs n >= 1 and p >= 1, got %d x %d",
                        n, p));
  }
  return absl::OkStatus();
}

std::vector<std::string> DefaultNames(int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back(absl::StrCat("x", j));
  return names;
}

}  // namespace

absl::StatusOr<Dataset> SynthRidge(int n, int p, double noise_level,
                                   uint64_t seed) {
  RETURN_IF_ERROR(ValidateShape(n, p));
  if (!(noise_level >= 0)) {
    return absl::InvalidArgumentError("noise level must be nonnegative");
  }
  RandomSource rng(seed, /*stream_id=*/0x5EED0001);
  SyntheticDesign design = DrawDesign(n, p, rng);
  Eigen::VectorXd y = design.signal;
  if (noise_level > 0) {
    for (int i = 0; i < n; ++i) y[i] += noise_level * rng.NextGaussian();
  }
  return RenormalizeL1(Dataset(
      std::move(design.x), std::move(y), Task::kRegression, DefaultNames(p),
      absl::StrFormat("synth_ridge(n=%d,p=%d,noise=%g,seed=%d)", n, p,
                      noise_level, seed)));
}

absl::StatusOr<Dataset> SynthLogistic(int n, int p, double margin,
                                      uint64_t seed) {
  RETURN_IF_ERROR(ValidateShape(n, p));
  if (!(margin >= 0)) {
    return absl::InvalidArgumentError("margin must be nonnegative");
  }
  RandomSource rng(seed, /*stream_id=*/0x5EED0002);
  SyntheticDesign design = DrawDesign(n, p, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = margin * design.signal[i] + rng.NextLogistic() >= 0 ? 1.0 : -1.0;
  }
  return RenormalizeL1(Dataset(
      std::move(design.x), std::move(y), Task::kClassification,
      DefaultNames(p),
      absl::StrFormat("synth_logistic(n=%d,p=%d,margin=%g,seed=%d)", n, p,
                      margin, seed)));
}

}  // namespace expost
