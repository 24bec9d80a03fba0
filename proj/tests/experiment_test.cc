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

#include "expost/experiment.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "expost/data.h"
#include "expost/mechanisms.h"
#include "expost/random.h"

namespace expost {
namespace {

using ::absl::StatusCode;
using ::testing::HasSubstr;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string TempDir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

constexpr char kMinimalConfig[] = R"({
  "dataset": {"synthetic": {"n": 400, "p": 3, "noise": 0.1, "seed": 2}},
  "task": "regression",
  "lambda": 0.05,
  "alphas": [0.05, 0.1],
  "trials": 3,
  "seed": 9,
  "grid": {"T": 40, "eps_min": "auto", "eps_max": "auto"},
  "approaches": ["noise-reduction", "doubling", "theory", "fixed-eps"],
  "threads": 3
})";

TEST(ConfigTest, ParsesAllFields) {
  ExperimentConfig config = *ParseExperimentConfig(kMinimalConfig);
  ASSERT_TRUE(config.synthetic.has_value());
  EXPECT_EQ(config.synthetic->n, 400);
  EXPECT_EQ(config.synthetic->seed, 2u);
  EXPECT_EQ(config.task, Task::kRegression);
  EXPECT_DOUBLE_EQ(config.lambda, 0.05);
  EXPECT_THAT(config.alphas, ::testing::ElementsAre(0.05, 0.1));
  EXPECT_EQ(config.trials, 3);
  EXPECT_EQ(config.grid.steps, 40);
  EXPECT_FALSE(config.grid.eps_min.has_value());
  EXPECT_EQ(config.approaches.size(), 4u);
  EXPECT_FALSE(config.release_nonprivate);
}

TEST(ConfigTest, CsvSource) {
  ExperimentConfig config = *ParseExperimentConfig(R"({
    "dataset": {"csv": {"path": "d.csv", "label": "y", "drop": ["name"],
                        "log1p": ["a"], "log1p_label": true}},
    "alphas": [0.1], "approaches": ["theory"],
    "grid": {"T": 10, "eps_min": 0.001, "eps_max": 5}
  })");
  ASSERT_TRUE(config.csv.has_value());
  EXPECT_EQ(config.csv->schema.label_column, "y");
  EXPECT_THAT(config.csv->schema.drop_columns, ::testing::ElementsAre("name"));
  EXPECT_TRUE(config.csv->log1p_label);
  EXPECT_DOUBLE_EQ(*config.grid.eps_max, 5.0);
}

TEST(ConfigTest, Rejections) {
  const std::vector<std::string> bad = {
      "not json",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1],
          "approaches": ["theory"], "bogus": 1})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1, 0.05],
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [],
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1], "gamma": 1.5,
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1], "trials": 0,
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1],
          "approaches": ["magic"]})",
      R"({"alphas": [0.1], "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1], "grid": {"T": 1},
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": "x",
          "approaches": ["theory"]})",
      R"({"dataset": {"synthetic": {}}, "alphas": [0.1],
          "theory_method": "out-logistic", "approaches": ["theory"]})",
  };
  for (const std::string& text : bad) {
    EXPECT_EQ(ParseExperimentConfig(text).status().code(),
              StatusCode::kInvalidArgument)
        << text;
  }
}

TEST(ApproachTest, Names) {
  for (const char* name : {"noise-reduction", "doubling", "theory",
                           "fixed-eps"}) {
    EXPECT_EQ(ApproachName(*ParseApproach(name)), name);
  }
  EXPECT_FALSE(ParseApproach("sgd").ok());
}

TEST(GridTest, ReferenceEndpoints) {
  PrivacyGrid grid =
      *BuildGrid(100000, 77, 0.005, 0.05, TheoryMethod::kCovRidge, 1000);
  EXPECT_EQ(grid.size(), 1000);
  EXPECT_EQ(grid.min(), 1e-5);
  EXPECT_NEAR(grid.max(), 70.81563979533232, 1e-10);
}

TEST(GridTest, TwoPointsAreEndpoints) {
  PrivacyGrid grid = *BuildGeometricGrid(0.01, 3.0, 2);
  EXPECT_EQ(grid.Level(1), 0.01);
  EXPECT_EQ(grid.Level(2), 3.0);
}

TEST(GridTest, ConstantRatio) {
  PrivacyGrid grid = *BuildGeometricGrid(1e-5, 70.8, 1000);
  const double ratio = grid.Level(2) / grid.Level(1);
  for (int t = 2; t < grid.size(); ++t) {
    EXPECT_NEAR(grid.Level(t + 1) / grid.Level(t), ratio, 1e-12);
  }
}

TEST(GridTest, Errors) {
  EXPECT_FALSE(BuildGeometricGrid(1.0, 1.0, 10).ok());
  EXPECT_FALSE(BuildGeometricGrid(2.0, 1.0, 10).ok());
  EXPECT_FALSE(BuildGeometricGrid(0.1, 1.0, 1).ok());
}

TEST(TrialSeedTest, PureAndDistinct) {
  EXPECT_EQ(TrialSeed(5, Approach::kDoubling, 2, 7),
            TrialSeed(5, Approach::kDoubling, 2, 7));
  EXPECT_NE(TrialSeed(5, Approach::kDoubling, 2, 7),
            TrialSeed(5, Approach::kDoubling, 2, 8));
  EXPECT_NE(TrialSeed(5, Approach::kDoubling, 2, 7),
            TrialSeed(5, Approach::kNoiseReduction, 2, 7));
  EXPECT_NE(TrialSeed(5, Approach::kDoubling, 2, 7),
            TrialSeed(6, Approach::kDoubling, 2, 7));
}

TEST(TrialRecordTest, JsonRoundTripWithInfinity) {
  TrialRecord record;
  record.approach = "noise-reduction";
  record.alpha = 0.05;
  record.alpha_index = 1;
  record.trial = 4;
  record.eps_test = 0.3;
  record.eps_generate = INFINITY;
  record.eps_total = INFINITY;
  record.risk_factor = INFINITY;
  record.hypotheses_generated = 40;
  const std::string line = TrialRecordToJson(record);
  EXPECT_THAT(line, HasSubstr("\"inf\""));
  EXPECT_EQ(line.find('\n'), std::string::npos);
  TrialRecord back = *ParseTrialRecord(line);
  EXPECT_TRUE(back.bottom());
  EXPECT_FALSE(back.stop_index.has_value());
  EXPECT_EQ(back.eps_test, 0.3);
  EXPECT_EQ(back.hypotheses_generated, 40);
  EXPECT_EQ(TrialRecordToJson(back), line);

  record.stop_index = 12;
  record.eps_generate = 0.1 + 0.2;
  record.eps_total = record.eps_test + record.eps_generate;
  record.risk_factor = std::exp(record.eps_total);
  record.excess_risk = 1e-7;
  record.hypothesis_norm = 2.5;
  record.error = "boom";
  TrialRecord again = *ParseTrialRecord(TrialRecordToJson(record));
  EXPECT_EQ(again.eps_total, record.eps_total);
  EXPECT_EQ(*again.excess_risk, 1e-7);
  EXPECT_EQ(*again.error, "boom");
  EXPECT_EQ(*again.stop_index, 12);
}

TEST(TrialRecordTest, MalformedLinesCarryLineNumber) {
  const std::string dir = TempDir("malformed");
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/records.jsonl";
  TrialRecord record;
  record.approach = "theory";
  record.alpha = 0.1;
  std::ofstream(path) << TrialRecordToJson(record) << "\n{\"approach\": 3}\n";
  absl::StatusOr<std::vector<TrialRecord>> records = ReadTrialRecords(path);
  ASSERT_FALSE(records.ok());
  EXPECT_THAT(records.status().message(), HasSubstr(":2:"));
  EXPECT_FALSE(ParseTrialRecord("[1, 2]").ok());
}

// Independent two-pass aggregation.
TEST(SummarizeTest, MatchesTwoPassOracle) {
  RandomSource rng(3, 0);
  std::vector<TrialRecord> records;
  for (int i = 0; i < 500; ++i) {
    TrialRecord r;
    r.approach = i % 3 == 0 ? "doubling" : "noise-reduction";
    r.alpha = (i % 2 == 0) ? 0.05 : 0.1;
    const double u = rng.NextUniform();
    if (u < 0.05) {
      r.error = "failed";
      r.eps_total = r.eps_generate = INFINITY;
    } else if (u < 0.15) {
      r.eps_test = 1;
      r.eps_total = r.eps_generate = INFINITY;
    } else {
      r.stop_index = 1;
      r.eps_test = rng.NextUniform();
      r.eps_generate = 10 * rng.NextUniform();
      r.eps_total = r.eps_test + r.eps_generate;
      r.excess_risk = 0.2 * rng.NextUniform();
      r.hypothesis_norm = rng.NextUniform();
    }
    records.push_back(r);
  }
  std::vector<SummaryRow> rows = Summarize(records);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].approach, "doubling");
  EXPECT_EQ(rows[0].alpha, 0.05);
  for (const SummaryRow& row : rows) {
    std::vector<double> eps, risk;
    int trials = 0, errors = 0, bottoms = 0, accurate = 0;
    double norm_sum = 0;
    for (const TrialRecord& r : records) {
      if (r.approach != row.approach || r.alpha != row.alpha) continue;
      ++trials;
      if (r.error) {
        ++errors;
      } else if (std::isinf(r.eps_total)) {
        ++bottoms;
      } else {
        eps.push_back(r.eps_total);
        risk.push_back(*r.excess_risk);
        accurate += *r.excess_risk <= r.alpha;
        norm_sum += *r.hypothesis_norm;
      }
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    };
    auto se = [&](const std::vector<double>& v) {
      const double m = mean(v);
      double ss = 0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::sqrt(ss / (v.size() - 1) / v.size());
    };
    EXPECT_EQ(row.trials, trials);
    EXPECT_EQ(row.errors, errors);
    EXPECT_EQ(row.bottoms, bottoms);
    EXPECT_EQ(row.finite, static_cast<int>(eps.size()));
    EXPECT_NEAR(row.eps_total_mean, mean(eps), 1e-12);
    EXPECT_NEAR(row.eps_total_se, se(eps), 1e-12);
    EXPECT_NEAR(row.excess_risk_mean, mean(risk), 1e-12);
    EXPECT_NEAR(row.excess_risk_se, se(risk), 1e-12);
    EXPECT_NEAR(row.accurate_fraction,
                static_cast<double>(accurate) / eps.size(), 1e-12);
    EXPECT_NEAR(row.norm_mean, norm_sum / eps.size(), 1e-12);
  }
}

TEST(RunExperimentTest, OutputsAndDeterminism) {
  ExperimentConfig config = *ParseExperimentConfig(kMinimalConfig);
  Dataset data = *LoadExperimentData(config);
  const std::string first = TempDir("run_a");
  const std::string second = TempDir("run_b");
  ExperimentOutputs a = *RunExperiment(config, data, first);
  config.threads = 1;
  ExperimentOutputs b = *RunExperiment(config, data, second);
  EXPECT_EQ(a.trials_run, 4 * 2 * 3);
  EXPECT_EQ(a.trial_errors, 0);
  EXPECT_EQ(ReadFile(a.records_path), ReadFile(b.records_path));
  EXPECT_EQ(ReadFile(a.summary_path), ReadFile(b.summary_path));

  std::vector<TrialRecord> records = *ReadTrialRecords(a.records_path);
  ASSERT_EQ(records.size(), 24u);
  // Ordered by (approach, alpha, trial).
  EXPECT_EQ(records[0].approach, "noise-reduction");
  EXPECT_EQ(records[0].trial, 0);
  EXPECT_EQ(records[3].alpha, 0.1);
  EXPECT_EQ(records[23].approach, "fixed-eps");
  EXPECT_EQ(records[23].trial, 2);
  for (const TrialRecord& r : records) {
    EXPECT_FALSE(r.wall_clock_seconds.has_value());
    if (r.bottom()) continue;
    EXPECT_EQ(r.eps_total, r.eps_test + r.eps_generate);
    ASSERT_TRUE(r.excess_risk.has_value());
    EXPECT_GE(*r.excess_risk, -1e-9);
  }
}

TEST(RunExperimentTest, TheoryHasZeroVariance) {
  ExperimentConfig config = *ParseExperimentConfig(kMinimalConfig);
  config.approaches = {Approach::kTheory};
  config.trials = 5;
  Dataset data = *LoadExperimentData(config);
  ExperimentOutputs out = *RunExperiment(config, data, TempDir("theory"));
  std::vector<SummaryRow> rows = Summarize(*ReadTrialRecords(out.records_path));
  ASSERT_EQ(rows.size(), 2u);
  for (const SummaryRow& row : rows) {
    EXPECT_EQ(row.eps_total_mean,
              *TheoryEpsilon(TheoryMethod::kCovRidge, row.alpha, 400, 3,
                             0.05));
    EXPECT_EQ(row.eps_total_se, 0.0);
  }
}

TEST(RunExperimentTest, ReorderingApproachesKeepsTrials) {
  ExperimentConfig config = *ParseExperimentConfig(kMinimalConfig);
  config.approaches = {Approach::kDoubling, Approach::kNoiseReduction};
  Dataset data = *LoadExperimentData(config);
  std::vector<TrialRecord> a = *ReadTrialRecords(
      RunExperiment(config, data, TempDir("order_a"))->records_path);
  config.approaches = {Approach::kNoiseReduction, Approach::kDoubling};
  std::vector<TrialRecord> b = *ReadTrialRecords(
      RunExperiment(config, data, TempDir("order_b"))->records_path);
  std::map<std::tuple<std::string, int, int>, std::string> by_key;
  for (const TrialRecord& r : a) {
    by_key[{r.approach, r.alpha_index, r.trial}] = TrialRecordToJson(r);
  }
  for (const TrialRecord& r : b) {
    EXPECT_EQ((by_key[{r.approach, r.alpha_index, r.trial}]),
              TrialRecordToJson(r));
  }
}

TEST(RunExperimentTest, LogisticSweepAndNonprivateFlag) {
  ExperimentConfig config = *ParseExperimentConfig(R"({
    "dataset": {"synthetic": {"n": 600, "p": 3, "noise": 2.0, "seed": 4}},
    "task": "classification", "lambda": 0.05, "alphas": [0.1],
    "trials": 2, "seed": 1, "grid": {"T": 30},
    "approaches": ["noise-reduction", "doubling", "theory"],
    "release_nonprivate": true
  })");
  EXPECT_EQ(DefaultTheoryMethod(config.task), TheoryMethod::kOutLogistic);
  Dataset data = *LoadExperimentData(config);
  ExperimentOutputs out = *RunExperiment(config, data, TempDir("logistic"));
  EXPECT_EQ(out.trials_run, 6);
  EXPECT_EQ(out.trial_errors, 0);
}

TEST(RunExperimentTest, RejectsMismatchedTask) {
  ExperimentConfig config = *ParseExperimentConfig(kMinimalConfig);
  Dataset logistic = *SynthLogistic(100, 3, 1.0, 1);
  EXPECT_EQ(RunExperiment(config, logistic, TempDir("mismatch"))
                .status()
                .code(),
            StatusCode::kInvalidArgument);
}

}  // namespace
}  // namespace expost
