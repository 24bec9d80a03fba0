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

// expost: run accuracy-first private ERM experiments.
//
//   expost run --config exp.json --out results/
//   expost run --synthetic 5000,5 --task regression --alpha-grid 0.05,0.1
//       --approaches noise-reduction,doubling,theory --trials 40 --out r/
//   expost plot --records r/records.jsonl --out r/plots
//   expost audit
//   expost gen --task classification --n 5000 --p 5 --out data.csv
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal or
// solver error (including a failed audit).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "expost/audit.h"
#include "expost/data.h"
#include "expost/experiment.h"
#include "expost/plots.h"

namespace {

using ::expost::ExperimentConfig;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int Fail(int code, const absl::Status& status) {
  std::cerr << "error: " << status.message() << "\n";
  return code;
}

absl::StatusOr<std::vector<double>> ParseNumberList(const std::string& text) {
  std::vector<double> values;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    double v;
    if (!absl::SimpleAtod(part, &v)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("'%s' is not a number", std::string(part)));
    }
    values.push_back(v);
  }
  return values;
}

// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
absl::StatusOr<std::vector<double>> ParseAlphaGrid(const std::string& text) {
  std::vector<std::string> range = absl::StrSplit(text, ':');
  if (range.size() == 1) return ParseNumberList(text);
  double start, stop, step;
  if (range.size() != 3 || !absl::SimpleAtod(range[0], &start) ||
      !absl::SimpleAtod(range[1], &stop) ||
      !absl::SimpleAtod(range[2], &step) || !(step > 0) || stop < start) {
    return absl::InvalidArgumentError(
        absl::StrFormat("bad alpha range '%s' (want start:stop:step)", text));
  }
  std::vector<double> values;
  for (int i = 0; start + i * step <= stop * (1 + 1e-12); ++i) {
    values.push_back(start + i * step);
  }
  return values;
}

struct RunFlags {
  std::string config_path;
  std::string dataset;
  std::string synthetic;
  std::string task;
  std::string label;
  std::vector<std::string> features;
  std::vector<std::string> drop;
  std::vector<std::string> log1p;
  bool log1p_label = false;
  double noise = 0.1;
  uint64_t data_seed = 1;
  std::optional<double> lambda;
  std::string alpha_grid;
  std::optional<double> gamma;
  std::optional<int> trials;
  std::optional<uint64_t> seed;
  std::string approaches;
  std::optional<int> grid_t;
  std::optional<double> fixed_eps;
  std::optional<int> threads;
  bool release_nonprivate = false;
  bool record_timing = false;
  std::string out = "results";
};

absl::StatusOr<ExperimentConfig> BuildConfig(const RunFlags& f) {
  ExperimentConfig config;
  if (!f.config_path.empty()) {
    auto loaded = expost::LoadExperimentConfig(f.config_path);
    if (!loaded.ok()) return loaded.status();
    config = *std::move(loaded);
  }
  if (!f.task.empty()) {
    auto task = expost::ParseTask(f.task);
    if (!task.ok()) return task.status();
    config.task = *task;
  }
  if (!f.synthetic.empty()) {
    auto np = ParseNumberList(f.synthetic);
    if (!np.ok()) return np.status();
    if (np->size() != 2) {
      return absl::InvalidArgumentError("--synthetic expects N,P");
    }
    expost::SyntheticSpec spec;
    spec.n = static_cast<int>((*np)[0]);
    spec.p = static_cast<int>((*np)[1]);
    spec.noise = f.noise;
    spec.seed = f.data_seed;
    config.synthetic = spec;
    config.csv.reset();
  }
  if (!f.dataset.empty()) {
    expost::CsvSource source;
    source.path = f.dataset;
    source.schema.label_column = f.label;
    source.schema.feature_columns = f.features;
    source.schema.drop_columns = f.drop;
    source.log1p_columns = f.log1p;
    source.log1p_label = f.log1p_label;
    if (f.label.empty()) {
      return absl::InvalidArgumentError("--dataset needs --label");
    }
    config.csv = source;
    config.synthetic.reset();
  }
  if (config.csv.has_value()) config.csv->schema.task = config.task;
  if (f.lambda) config.lambda = *f.lambda;
  if (!f.alpha_grid.empty()) {
    auto alphas = ParseAlphaGrid(f.alpha_grid);
    if (!alphas.ok()) return alphas.status();
    config.alphas = *alphas;
  }
  if (f.gamma) config.gamma = *f.gamma;
  if (f.trials) config.trials = *f.trials;
  if (f.seed) config.seed = *f.seed;
  if (f.grid_t) config.grid.steps = *f.grid_t;
  if (f.fixed_eps) config.fixed_eps = *f.fixed_eps;
  if (f.threads) config.threads = *f.threads;
  if (f.release_nonprivate) config.release_nonprivate = true;
  if (f.record_timing) config.record_timing = true;
  if (!f.approaches.empty()) {
    config.approaches.clear();
    for (absl::string_view name :
         absl::StrSplit(f.approaches, ',', absl::SkipEmpty())) {
      auto approach = expost::ParseApproach(std::string(name));
      if (!approach.ok()) return approach.status();
      config.approaches.push_back(*approach);
    }
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return config;
}

int Run(const RunFlags& flags) {
  absl::StatusOr<ExperimentConfig> config = BuildConfig(flags);
  if (!config.ok()) return Fail(kExitConfig, config.status());
  absl::StatusOr<expost::Dataset> dataset = expost::LoadExperimentData(*config);
  if (!dataset.ok()) return Fail(kExitData, dataset.status());
  absl::StatusOr<expost::ExperimentOutputs> outputs =
      expost::RunExperiment(*config, *dataset, flags.out);
  if (!outputs.ok()) return Fail(kExitInternal, outputs.status());
  std::cout << absl::StrFormat("%d trials (%d failed)\nrecords: %s\nsummary: %s\n",
                               outputs->trials_run, outputs->trial_errors,
                               outputs->records_path, outputs->summary_path);
  return 0;
}

int Plot(const std::string& records, const std::string& out) {
  absl::StatusOr<std::vector<expost::TrialRecord>> parsed =
      expost::ReadTrialRecords(records);
  if (!parsed.ok()) return Fail(kExitData, parsed.status());
  absl::StatusOr<std::vector<std::string>> files =
      expost::EmitPlots(*parsed, out);
  if (!files.ok()) {
    return Fail(absl::IsInvalidArgument(files.status()) ? kExitData
                                                        : kExitInternal,
                files.status());
  }
  for (const std::string& f : *files) std::cout << f << "\n";
  return 0;
}

int Audit(int64_t samples, uint64_t seed) {
  absl::StatusOr<std::vector<expost::AuditCase>> cases =
      expost::RunAuditSuite(samples, seed);
  if (!cases.ok()) return Fail(kExitInternal, cases.status());
  bool all_ok = true;
  for (const expost::AuditCase& c : *cases) {
    all_ok &= c.ok();
    std::cout << absl::StrFormat(
        "%-30s max|log ratio| = %.4f over %2d bins  expected %-9s  %s\n",
        c.name, c.result.max_log_ratio, c.result.bins_compared,
        c.expect_violation ? "violation" : "pass", c.ok() ? "OK" : "FAIL");
  }
  return all_ok ? 0 : kExitInternal;
}

int Gen(const std::string& task_name, int n, int p, double noise,
        uint64_t seed, const std::string& out) {
  absl::StatusOr<expost::Task> task = expost::ParseTask(task_name);
  if (!task.ok()) return Fail(kExitConfig, task.status());
  absl::StatusOr<expost::Dataset> dataset =
      *task == expost::Task::kRegression
          ? expost::SynthRidge(n, p, noise, seed)
          : expost::SynthLogistic(n, p, noise, seed);
  if (!dataset.ok()) return Fail(kExitConfig, dataset.status());
  if (absl::Status s = expost::WriteCsv(*dataset, out); !s.ok()) {
    return Fail(kExitData, s);
  }
  std::cout << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accuracy-first private ERM experiments"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a trial sweep");
  run_cmd->add_option("--config", run.config_path, "JSON experiment config");
  run_cmd->add_option("--dataset", run.dataset, "CSV dataset path");
  run_cmd->add_option("--synthetic", run.synthetic,
                      "Synthetic dataset size as N,P");
  run_cmd->add_option("--task", run.task, "regression or classification");
  run_cmd->add_option("--label", run.label, "Label column (name or index)");
  run_cmd->add_option("--features", run.features, "Feature columns")
      ->delimiter(',');
  run_cmd->add_option("--drop", run.drop, "Columns to drop")->delimiter(',');
  run_cmd->add_option("--log1p", run.log1p, "Columns to map through log1p")
      ->delimiter(',');
  run_cmd->add_flag("--log1p-label", run.log1p_label, "Map labels via log1p");
  run_cmd->add_option("--noise", run.noise,
                      "Synthetic label noise (regression) or margin");
  run_cmd->add_option("--data-seed", run.data_seed, "Synthetic data seed");
  run_cmd->add_option("--lambda", run.lambda, "Regularization strength");
  run_cmd->add_option("--alpha-grid", run.alpha_grid,
                      "Target excess risks: a,b,c or start:stop:step");
  run_cmd->add_option("--gamma", run.gamma, "Failure probability");
  run_cmd->add_option("--trials", run.trials, "Trials per (approach, alpha)");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--approaches", run.approaches,
                      "Comma list of noise-reduction, doubling, theory, "
                      "fixed-eps");
  run_cmd->add_option("--grid-T", run.grid_t, "Privacy grid size");
  run_cmd->add_option("--fixed-eps", run.fixed_eps,
                      "Epsilon for the fixed-eps approach");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0: auto)");
  run_cmd->add_flag("--release-nonprivate", run.release_nonprivate,
                    "Release the exact minimizer when a test never halts");
  run_cmd->add_flag("--record-timing", run.record_timing,
                    "Add wall-clock seconds to each record");
  run_cmd->add_option("--out", run.out, "Output directory");

  std::string records;
  std::string plot_out = "plots";
  CLI::App* plot_cmd = app.add_subcommand("plot", "Render charts from records");
  plot_cmd->add_option("--records", records, "records.jsonl path")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory");

  int64_t audit_samples = 1000000;
  uint64_t audit_seed = 1;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "Run the statistical privacy audits");
  audit_cmd->add_option("--samples", audit_samples, "Samples per input");
  audit_cmd->add_option("--seed", audit_seed, "Seed");

  std::string gen_task = "regression";
  int gen_n = 5000;
  int gen_p = 5;
  double gen_noise = 0.1;
  uint64_t gen_seed = 1;
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset");
  gen_cmd->add_option("--task", gen_task, "regression or classification");
  gen_cmd->add_option("--n", gen_n, "Rows");
  gen_cmd->add_option("--p", gen_p, "Features");
  gen_cmd->add_option("--noise", gen_noise, "Label noise or margin");
  gen_cmd->add_option("--seed", gen_seed, "Seed");
  gen_cmd->add_option("--out", gen_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run_cmd) return Run(run);
  if (*plot_cmd) return Plot(records, plot_out);
  if (*audit_cmd) return Audit(audit_samples, audit_seed);
  if (*gen_cmd) {
    return Gen(gen_task, gen_n, gen_p, gen_noise, gen_seed, gen_out);
  }
  return kExitConfig;
}
