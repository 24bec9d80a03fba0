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

#include "expost/plots.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "expost/experiment.h"
#include "expost/random.h"

namespace expost {
namespace {

using ::testing::HasSubstr;

std::string Fresh(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TrialRecord Finite(const std::string& approach, double alpha, double eps_test,
                   double eps_generate, double risk, double norm) {
  TrialRecord r;
  r.approach = approach;
  r.alpha = alpha;
  r.stop_index = 1;
  r.eps_test = eps_test;
  r.eps_generate = eps_generate;
  r.eps_total = eps_test + eps_generate;
  r.risk_factor = std::exp(r.eps_total);
  r.excess_risk = risk;
  r.hypothesis_norm = norm;
  return r;
}

TEST(EmitPlotsTest, EmptyInputWritesNothing) {
  const std::string dir = Fresh("empty");
  EXPECT_EQ(EmitPlots({}, dir).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(std::filesystem::exists(dir));

  const std::string records = Fresh("empty_records.jsonl");
  std::ofstream(records).close();
  EXPECT_FALSE(EmitPlotsFromFile(records, dir).ok());
  EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(EmitPlotsTest, SinglePoint) {
  const std::string dir = Fresh("single");
  std::vector<std::string> files =
      *EmitPlots({Finite("theory", 0.1, 0.0, 3.0, 0.01, 1.5)}, dir);
  EXPECT_EQ(files.size(), 8u);
  for (const std::string& file : files) {
    EXPECT_GT(std::filesystem::file_size(file), 0u) << file;
  }
  const std::string svg = ReadFile(dir + "/eps_total.svg");
  EXPECT_THAT(svg, HasSubstr("<svg"));
  EXPECT_THAT(svg, HasSubstr("theory"));
  EXPECT_THAT(ReadFile(dir + "/norms.csv"), HasSubstr("theory,0.10000000000000001,1.5"));
}

TEST(EmitPlotsTest, MalformedRecordReportsLine) {
  const std::string path = Fresh("bad.jsonl");
  std::ofstream(path) << TrialRecordToJson(Finite("theory", 0.1, 0, 1, 0, 1))
                      << "\n"
                      << TrialRecordToJson(Finite("theory", 0.1, 0, 1, 0, 1))
                      << "\n{oops\n";
  absl::StatusOr<std::vector<std::string>> files =
      EmitPlotsFromFile(path, Fresh("bad_out"));
  ASSERT_FALSE(files.ok());
  EXPECT_THAT(files.status().message(), HasSubstr(":3:"));
}

// The eps_total table against a one-pass aggregation written here.
TEST(EmitPlotsTest, TableMatchesIndependentAggregation) {
  RandomSource rng(1, 0);
  std::vector<TrialRecord> records;
  for (int i = 0; i < 300; ++i) {
    const std::string approach = i % 2 ? "doubling" : "noise-reduction";
    const double alpha = 0.05 * (1 + i % 3);
    if (i % 17 == 0) {
      TrialRecord bottom;
      bottom.approach = approach;
      bottom.alpha = alpha;
      bottom.eps_test = 1;
      bottom.eps_generate = bottom.eps_total = bottom.risk_factor = INFINITY;
      records.push_back(bottom);
      continue;
    }
    records.push_back(Finite(approach, alpha, rng.NextUniform(),
                             5 * rng.NextUniform(), 0.1 * rng.NextUniform(),
                             rng.NextUniform()));
  }
  const std::string dir = Fresh("table");
  ASSERT_TRUE(EmitPlots(records, dir).ok());

  struct Sums {
    double n = 0, s = 0, ss = 0, test = 0;
    int bottoms = 0;
  };
  std::map<std::pair<std::string, double>, Sums> oracle;
  for (const TrialRecord& r : records) {
    Sums& sums = oracle[{r.approach, r.alpha}];
    if (std::isinf(r.eps_total)) {
      ++sums.bottoms;
      continue;
    }
    sums.n += 1;
    sums.s += r.eps_total;
    sums.ss += r.eps_total * r.eps_total;
    sums.test += r.eps_test;
  }

  std::vector<std::string> lines =
      absl::StrSplit(ReadFile(dir + "/eps_total.csv"), '\n',
                     absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 1 + oracle.size());
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = absl::StrSplit(lines[i], ',');
    ASSERT_EQ(f.size(), 7u);
    double alpha, mean, se;
    ASSERT_TRUE(absl::SimpleAtod(f[1], &alpha));
    ASSERT_TRUE(absl::SimpleAtod(f[2], &mean));
    ASSERT_TRUE(absl::SimpleAtod(f[3], &se));
    const Sums& sums = oracle.at({f[0], alpha});
    const double m = sums.s / sums.n;
    const double var = (sums.ss - sums.n * m * m) / (sums.n - 1);
    EXPECT_NEAR(mean, m, 1e-12);
    EXPECT_NEAR(se, std::sqrt(var / sums.n), 1e-10);
    EXPECT_EQ(f[5], std::to_string(sums.bottoms));
  }

  lines = absl::StrSplit(ReadFile(dir + "/breakdown.csv"), '\n',
                         absl::SkipEmpty());
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = absl::StrSplit(lines[i], ',');
    double alpha, test_mean;
    ASSERT_TRUE(absl::SimpleAtod(f[1], &alpha));
    ASSERT_TRUE(absl::SimpleAtod(f[2], &test_mean));
    const Sums& sums = oracle.at({f[0], alpha});
    EXPECT_NEAR(test_mean, sums.test / sums.n, 1e-12);
  }
}

TEST(RenderTest, LogScaleAndEmptySeries) {
  ChartSeries s{"a", {0.1, 0.2}, {1.0, 1000.0}, {}};
  ChartOptions options{"t", "x", "y", true, false};
  const std::string svg = RenderLineChart({s}, options);
  EXPECT_THAT(svg, HasSubstr("</svg>"));
  EXPECT_THAT(RenderLineChart({}, options), HasSubstr("</svg>"));
  EXPECT_THAT(RenderStackedBars({s}, {s}, options), HasSubstr("</svg>"));
}

}  // namespace
}  // namespace expost
