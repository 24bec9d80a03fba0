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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "expost/baselines.h"
#include "expost/status_macros.h"
#include "nlohmann/json.hpp"

namespace expost {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

absl::Status CheckKeys(const json& object,
                       std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must be a JSON object", where));
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("unknown key '%s' in %s", key, where));
    }
  }
  return absl::OkStatus();
}

// "auto" or absent -> nullopt.
std::optional<double> AutoOrNumber(const json& object, const char* key) {
  if (!object.contains(key)) return std::nullopt;
  const json& value = object.at(key);
  if (value.is_string() && value.get<std::string>() == "auto") {
    return std::nullopt;
  }
  return value.get<double>();
}

absl::StatusOr<ExperimentConfig> ParseConfigJson(const json& root) {
  RETURN_IF_ERROR(CheckKeys(
      root,
      {"dataset", "task", "lambda", "alphas", "gamma", "trials", "seed",
       "grid", "approaches", "theory_method", "fixed_eps",
       "release_nonprivate", "record_timing", "threads"},
      "config"));
  ExperimentConfig config;
  if (root.contains("task")) {
    ASSIGN_OR_RETURN(config.task, ParseTask(root.at("task").get<std::string>()));
  }
  config.lambda = root.value("lambda", config.lambda);
  config.alphas = root.value("alphas", std::vector<double>{});
  config.gamma = root.value("gamma", config.gamma);
  config.trials = root.value("trials", config.trials);
  config.seed = root.value("seed", config.seed);
  config.fixed_eps = root.value("fixed_eps", config.fixed_eps);
  config.release_nonprivate =
      root.value("release_nonprivate", config.release_nonprivate);
  config.record_timing = root.value("record_timing", config.record_timing);
  config.threads = root.value("threads", config.threads);
  if (root.contains("theory_method")) {
    ASSIGN_OR_RETURN(config.theory_method,
                     ParseTheoryMethod(root.at("theory_method").get<std::string>()));
  }
  if (root.contains("approaches")) {
    for (const json& name : root.at("approaches")) {
      ASSIGN_OR_RETURN(Approach approach,
                       ParseApproach(name.get<std::string>()));
      config.approaches.push_back(approach);
    }
  }
  if (root.contains("grid")) {
    const json& grid = root.at("grid");
    RETURN_IF_ERROR(CheckKeys(grid, {"T", "eps_min", "eps_max"}, "grid"));
    config.grid.steps = grid.value("T", config.grid.steps);
    config.grid.eps_min = AutoOrNumber(grid, "eps_min");
    config.grid.eps_max = AutoOrNumber(grid, "eps_max");
  }
  if (!root.contains("dataset")) {
    return absl::InvalidArgumentError("config needs a 'dataset' section");
  }
  const json& dataset = root.at("dataset");
  RETURN_IF_ERROR(CheckKeys(dataset, {"synthetic", "csv"}, "dataset"));
  if (dataset.contains("synthetic")) {
    const json& s = dataset.at("synthetic");
    RETURN_IF_ERROR(CheckKeys(s, {"n", "p", "noise", "seed"}, "synthetic"));
    SyntheticSpec spec;
    spec.n = s.value("n", spec.n);
    spec.p = s.value("p", spec.p);
    spec.noise = s.value("noise", spec.noise);
    spec.seed = s.value("seed", spec.seed);
    config.synthetic = spec;
  }
  if (dataset.contains("csv")) {
    const json& c = dataset.at("csv");
    RETURN_IF_ERROR(CheckKeys(
        c, {"path", "features", "label", "drop", "log1p", "log1p_label"},
        "csv"));
    CsvSource source;
    source.path = c.at("path").get<std::string>();
    source.schema.feature_columns =
        c.value("features", std::vector<std::string>{});
    source.schema.label_column = c.at("label").get<std::string>();
    source.schema.drop_columns = c.value("drop", std::vector<std::string>{});
    source.schema.task = config.task;
    source.log1p_columns = c.value("log1p", std::vector<std::string>{});
    source.log1p_label = c.value("log1p_label", false);
    config.csv = source;
  }
  RETURN_IF_ERROR(config.Validate());
  return config;
}

json NumberOrInf(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double ReadNumberOrInf(const json& value) {
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw json::type_error::create(302, "expected a number or \"inf\"",
                                   &value);
  }
  return value.get<double>();
}

template <typename T>
json OptionalJson(const std::optional<T>& value) {
  return value.has_value() ? json(*value) : json(nullptr);
}

// Welford accumulator.
struct Moments {
  int count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  double StandardError() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / (count - 1) / count);
  }
};

std::string FormatDouble(double value) {
  return absl::StrFormat("%.17g", value);
}

// Everything a trial needs that does not depend on the trial index.
struct SweepContext {
  const ExperimentConfig* config = nullptr;
  std::optional<RidgeProblem> ridge;
  std::optional<LogisticProblem> logistic;
  TheoryMethod theory_method = TheoryMethod::kCovRidge;
  std::vector<PrivacyGrid> grids;  // per alpha
  std::vector<int> doubling_steps;  // per alpha

  const ErmProblem& problem() const {
    if (ridge.has_value()) return *ridge;
    return *logistic;
  }
};

absl::StatusOr<Hypothesis> SingleShot(const SweepContext& ctx, double eps,
                                      RandomSource& rng) {
  if (ctx.logistic.has_value()) {
    return OutputPerturbLogistic(*ctx.logistic, eps, rng);
  }
  if (ctx.theory_method == TheoryMethod::kOutRidge) {
    return OutputPerturbRidge(*ctx.ridge, eps, rng);
  }
  return CovariancePerturb(*ctx.ridge, eps, rng);
}

void FillFromPipeline(const PipelineResult& result, TrialRecord& record) {
  record.stop_index = result.record.stop_index;
  record.eps_test = result.record.eps_test;
  record.eps_generate = result.record.eps_generate;
  record.eps_total = result.record.eps_total;
  record.risk_factor = result.record.risk_factor;
  record.excess_risk = result.excess_risk;
  if (result.hypothesis.has_value()) {
    record.hypothesis_norm = result.hypothesis->theta.norm();
  }
  record.hypotheses_generated = result.hypotheses_generated;
  record.released_nonprivate = result.released_nonprivate;
}

absl::Status RunTrialInto(const SweepContext& ctx, Approach approach,
                          int alpha_index, RandomSource& rng,
                          TrialRecord& record) {
  const ExperimentConfig& config = *ctx.config;
  PipelineOptions options;
  options.alpha = config.alphas[alpha_index];
  options.gamma = config.gamma;
  options.release_nonprivate = config.release_nonprivate;
  const PrivacyGrid& grid = ctx.grids[alpha_index];

  switch (approach) {
    case Approach::kNoiseReduction: {
      absl::StatusOr<PipelineResult> result =
          ctx.ridge.has_value() ? CovNr(*ctx.ridge, grid, options, rng)
                                : OutputNr(*ctx.logistic, grid, options, rng);
      RETURN_IF_ERROR(result.status());
      FillFromPipeline(*result, record);
      return absl::OkStatus();
    }
    case Approach::kDoubling: {
      ASSIGN_OR_RETURN(
          DoublingSchedule schedule,
          DoublingSchedule::Create(grid.min(),
                                   ctx.doubling_steps[alpha_index]));
      const PrivateMechanism mechanism =
          ctx.ridge.has_value() ? CovariancePerturbMechanism(*ctx.ridge)
                                : OutputPerturbLogisticMechanism(*ctx.logistic);
      ASSIGN_OR_RETURN(DoublingRun run, RunDoubling(ctx.problem(), schedule,
                                                    mechanism, options, rng));
      FillFromPipeline(run.result, record);
      return absl::OkStatus();
    }
    case Approach::kTheory:
    case Approach::kFixedEps: {
      double eps = config.fixed_eps;
      if (approach == Approach::kTheory) {
        const ErmProblem& problem = ctx.problem();
        ASSIGN_OR_RETURN(eps, TheoryEpsilon(ctx.theory_method, options.alpha,
                                            problem.n(), problem.p(),
                                            problem.lambda()));
      }
      ASSIGN_OR_RETURN(Hypothesis h, SingleShot(ctx, eps, rng));
      record.stop_index = 1;
      record.eps_test = 0.0;
      record.eps_generate = eps;
      record.eps_total = eps;
      record.risk_factor = std::exp(eps);
      record.excess_risk = ctx.problem().ExcessRisk(h.theta);
      record.hypothesis_norm = h.theta.norm();
      record.hypotheses_generated = 1;
      return absl::OkStatus();
    }
  }
  return absl::InternalError("unknown approach");
}

TrialRecord RunTrial(const SweepContext& ctx, Approach approach,
                     int alpha_index, int trial) {
  TrialRecord record;
  record.approach = ApproachName(approach);
  record.alpha = ctx.config->alphas[alpha_index];
  record.alpha_index = alpha_index;
  record.trial = trial;
  RandomSource rng(TrialSeed(ctx.config->seed, approach, alpha_index, trial),
                   0);
  const auto start = std::chrono::steady_clock::now();
  const absl::Status status =
      RunTrialInto(ctx, approach, alpha_index, rng, record);
  if (ctx.config->record_timing) {
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
  if (!status.ok()) {
    TrialRecord failed;
    failed.approach = record.approach;
    failed.alpha = record.alpha;
    failed.alpha_index = alpha_index;
    failed.trial = trial;
    failed.eps_generate = kInf;
    failed.eps_total = kInf;
    failed.risk_factor = kInf;
    failed.wall_clock_seconds = record.wall_clock_seconds;
    failed.error = status.ToString();
    return failed;
  }
  return record;
}

}  // namespace

absl::StatusOr<Approach> ParseApproach(std::string_view name) {
  if (name == "noise-reduction") return Approach::kNoiseReduction;
  if (name == "doubling") return Approach::kDoubling;
  if (name == "theory") return Approach::kTheory;
  if (name == "fixed-eps") return Approach::kFixedEps;
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown approach '%s' (expected noise-reduction, doubling, theory or "
      "fixed-eps)",
      std::string(name)));
}

std::string ApproachName(Approach approach) {
  switch (approach) {
    case Approach::kNoiseReduction:
      return "noise-reduction";
    case Approach::kDoubling:
      return "doubling";
    case Approach::kTheory:
      return "theory";
    case Approach::kFixedEps:
      return "fixed-eps";
  }
  return "unknown";
}

absl::Status ExperimentConfig::Validate() const {
  if (synthetic.has_value() == csv.has_value()) {
    return absl::InvalidArgumentError(
        "exactly one of a synthetic spec or a CSV source is required");
  }
  if (synthetic.has_value() && (synthetic->n < 1 || synthetic->p < 1)) {
    return absl::InvalidArgumentError("synthetic n and p must be positive");
  }
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("lambda must be positive, got %g", lambda));
  }
  if (alphas.empty()) {
    return absl::InvalidArgumentError("the alpha grid is empty");
  }
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0) || !std::isfinite(alphas[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("alpha %g is not positive", alphas[i]));
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      return absl::InvalidArgumentError(
          "the alpha grid must be strictly ascending");
    }
  }
  if (!(gamma > 0 && gamma < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1), got %g", gamma));
  }
  if (trials < 1) {
    return absl::InvalidArgumentError("trials must be at least 1");
  }
  if (grid.steps < 2) {
    return absl::InvalidArgumentError("grid T must be at least 2");
  }
  if (grid.eps_min.has_value() && !(*grid.eps_min > 0)) {
    return absl::InvalidArgumentError("grid eps_min must be positive");
  }
  if (grid.eps_min.has_value() && grid.eps_max.has_value() &&
      !(*grid.eps_max > *grid.eps_min)) {
    return absl::InvalidArgumentError("grid eps_max must exceed eps_min");
  }
  if (approaches.empty()) {
    return absl::InvalidArgumentError("no approaches selected");
  }
  if (std::set<Approach>(approaches.begin(), approaches.end()).size() !=
      approaches.size()) {
    return absl::InvalidArgumentError("approaches contain duplicates");
  }
  if (!(fixed_eps > 0) || !std::isfinite(fixed_eps)) {
    return absl::InvalidArgumentError("fixed_eps must be positive");
  }
  if (threads < 0) {
    return absl::InvalidArgumentError("threads must be nonnegative");
  }
  if (theory_method.has_value() &&
      (*theory_method == TheoryMethod::kOutLogistic) !=
          (task == Task::kClassification)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "theory method %s does not match task %s",
        TheoryMethodName(*theory_method), TaskName(task)));
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view text) {
  const json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    return absl::InvalidArgumentError("config is not valid JSON");
  }
  try {
    return ParseConfigJson(root);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed config: ", e.what()));
  }
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrFormat("cannot open config %s", path));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentConfig(buffer.str());
}

absl::StatusOr<Dataset> LoadExperimentData(const ExperimentConfig& config) {
  RETURN_IF_ERROR(config.Validate());
  if (config.synthetic.has_value()) {
    const SyntheticSpec& s = *config.synthetic;
    if (config.task == Task::kRegression) {
      return SynthRidge(s.n, s.p, s.noise, s.seed);
    }
    return SynthLogistic(s.n, s.p, s.noise, s.seed);
  }
  CsvSchema schema = config.csv->schema;
  schema.task = config.task;
  ASSIGN_OR_RETURN(Dataset raw, LoadCsv(config.csv->path, schema));
  if (!config.csv->log1p_columns.empty() || config.csv->log1p_label) {
    ASSIGN_OR_RETURN(raw, TransformLog1p(raw, config.csv->log1p_columns,
                                         config.csv->log1p_label));
  }
  return RenormalizeL1(raw);
}

TheoryMethod DefaultTheoryMethod(Task task) {
  return task == Task::kRegression ? TheoryMethod::kCovRidge
                                   : TheoryMethod::kOutLogistic;
}

absl::StatusOr<PrivacyGrid> BuildGeometricGrid(double eps_min, double eps_max,
                                               int steps) {
  if (steps < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("grid needs T >= 2, got %d", steps));
  }
  if (!(eps_min > 0) || !std::isfinite(eps_max) || !(eps_min < eps_max)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "degenerate grid span [%g, %g]", eps_min, eps_max));
  }
  const double log_ratio = std::log(eps_max / eps_min);
  std::vector<double> levels(steps);
  for (int t = 0; t < steps; ++t) {
    levels[t] = eps_min * std::exp(log_ratio * t / (steps - 1));
  }
  levels.front() = eps_min;
  levels.back() = eps_max;
  return PrivacyGrid::Create(std::move(levels));
}

absl::StatusOr<PrivacyGrid> BuildGrid(int n, int p, double lambda,
                                      double alpha, TheoryMethod method,
                                      int steps) {
  ASSIGN_OR_RETURN(double theory, TheoryEpsilon(method, alpha, n, p, lambda));
  return BuildGeometricGrid(1.0 / n, 4.0 * theory, steps);
}

uint64_t TrialSeed(uint64_t seed, Approach approach, int alpha_index,
                   int trial) {
  return MixSeed({seed, static_cast<uint64_t>(approach),
                  static_cast<uint64_t>(alpha_index),
                  static_cast<uint64_t>(trial)});
}

std::string TrialRecordToJson(const TrialRecord& record) {
  json j = json::object();
  j["approach"] = record.approach;
  j["alpha"] = record.alpha;
  j["alpha_index"] = record.alpha_index;
  j["trial"] = record.trial;
  j["stop_index"] = OptionalJson(record.stop_index);
  j["eps_test"] = NumberOrInf(record.eps_test);
  j["eps_generate"] = NumberOrInf(record.eps_generate);
  j["eps_total"] = NumberOrInf(record.eps_total);
  j["risk_factor"] = NumberOrInf(record.risk_factor);
  j["excess_risk"] = OptionalJson(record.excess_risk);
  j["hypothesis_norm"] = OptionalJson(record.hypothesis_norm);
  j["hypotheses_generated"] = record.hypotheses_generated;
  j["released_nonprivate"] = record.released_nonprivate;
  if (record.wall_clock_seconds.has_value()) {
    j["wall_clock_seconds"] = *record.wall_clock_seconds;
  }
  if (record.error.has_value()) j["error"] = *record.error;
  return j.dump();
}

absl::StatusOr<TrialRecord> ParseTrialRecord(std::string_view line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("not a JSON object");
  }
  try {
    TrialRecord record;
    record.approach = j.at("approach").get<std::string>();
    record.alpha = j.at("alpha").get<double>();
    record.alpha_index = j.value("alpha_index", 0);
    record.trial = j.at("trial").get<int>();
    if (!j.at("stop_index").is_null()) {
      record.stop_index = j.at("stop_index").get<int>();
    }
    record.eps_test = ReadNumberOrInf(j.at("eps_test"));
    record.eps_generate = ReadNumberOrInf(j.at("eps_generate"));
    record.eps_total = ReadNumberOrInf(j.at("eps_total"));
    record.risk_factor = ReadNumberOrInf(j.at("risk_factor"));
    if (j.contains("excess_risk") && !j.at("excess_risk").is_null()) {
      record.excess_risk = j.at("excess_risk").get<double>();
    }
    if (j.contains("hypothesis_norm") && !j.at("hypothesis_norm").is_null()) {
      record.hypothesis_norm = j.at("hypothesis_norm").get<double>();
    }
    record.hypotheses_generated = j.value("hypotheses_generated", 0);
    record.released_nonprivate = j.value("released_nonprivate", false);
    if (j.contains("wall_clock_seconds")) {
      record.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    }
    if (j.contains("error")) record.error = j.at("error").get<std::string>();
    return record;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(e.what());
  }
}

absl::StatusOr<std::vector<TrialRecord>> ReadTrialRecords(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrFormat("cannot open records %s", path));
  }
  std::vector<TrialRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    absl::StatusOr<TrialRecord> record = ParseTrialRecord(line);
    if (!record.ok()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s:%d: %s", path, line_number,
                          record.status().message()));
    }
    records.push_back(*std::move(record));
  }
  return records;
}

std::vector<SummaryRow> Summarize(const std::vector<TrialRecord>& records) {
  struct Accumulator {
    SummaryRow row;
    Moments eps_total, eps_test, eps_generate, excess, norm;
    int accurate = 0;
    int with_risk = 0;
  };
  std::vector<Accumulator> groups;
  std::map<std::pair<std::string, double>, size_t> index;
  for (const TrialRecord& r : records) {
    const auto key = std::make_pair(r.approach, r.alpha);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().row.approach = r.approach;
      groups.back().row.alpha = r.alpha;
    }
    Accumulator& acc = groups[it->second];
    ++acc.row.trials;
    if (r.error.has_value()) {
      ++acc.row.errors;
      continue;
    }
    if (!std::isfinite(r.eps_total)) {
      ++acc.row.bottoms;
      continue;
    }
    ++acc.row.finite;
    acc.eps_total.Add(r.eps_total);
    acc.eps_test.Add(r.eps_test);
    acc.eps_generate.Add(r.eps_generate);
    if (r.excess_risk.has_value()) {
      acc.excess.Add(*r.excess_risk);
      ++acc.with_risk;
      if (*r.excess_risk <= r.alpha) ++acc.accurate;
    }
    if (r.hypothesis_norm.has_value()) acc.norm.Add(*r.hypothesis_norm);
  }
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (Accumulator& acc : groups) {
    SummaryRow row = acc.row;
    row.eps_total_mean = acc.eps_total.mean;
    row.eps_total_se = acc.eps_total.StandardError();
    row.eps_test_mean = acc.eps_test.mean;
    row.eps_generate_mean = acc.eps_generate.mean;
    row.excess_risk_mean = acc.excess.mean;
    row.excess_risk_se = acc.excess.StandardError();
    row.accurate_fraction =
        acc.with_risk > 0 ? static_cast<double>(acc.accurate) / acc.with_risk
                          : 0.0;
    row.norm_mean = acc.norm.mean;
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "approach,alpha,trials,errors,bottoms,finite,eps_total_mean,"
         "eps_total_se,eps_test_mean,eps_generate_mean,excess_risk_mean,"
         "excess_risk_se,accurate_fraction,norm_mean\n";
  for (const SummaryRow& r : rows) {
    out << absl::StrJoin(
               {r.approach, FormatDouble(r.alpha), absl::StrCat(r.trials),
                absl::StrCat(r.errors), absl::StrCat(r.bottoms),
                absl::StrCat(r.finite), FormatDouble(r.eps_total_mean),
                FormatDouble(r.eps_total_se), FormatDouble(r.eps_test_mean),
                FormatDouble(r.eps_generate_mean),
                FormatDouble(r.excess_risk_mean),
                FormatDouble(r.excess_risk_se),
                FormatDouble(r.accurate_fraction), FormatDouble(r.norm_mean)},
               ",")
        << "\n";
  }
}

absl::StatusOr<ExperimentOutputs> RunExperiment(const ExperimentConfig& config,
                                                const Dataset& dataset,
                                                const std::string& out_dir) {
  RETURN_IF_ERROR(config.Validate());
  RETURN_IF_ERROR(RequireFinalized(dataset));
  if (dataset.task() != config.task) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dataset task %s does not match config task %s",
        TaskName(dataset.task()), TaskName(config.task)));
  }

  SweepContext ctx;
  ctx.config = &config;
  ctx.theory_method =
      config.theory_method.value_or(DefaultTheoryMethod(config.task));
  if (config.task == Task::kRegression) {
    ASSIGN_OR_RETURN(RidgeProblem problem,
                     RidgeProblem::Create(dataset, config.lambda));
    ctx.ridge.emplace(std::move(problem));
  } else {
    LogisticOptions options;
    options.tol = LogisticToleranceFor(config.lambda, config.alphas.front());
    ASSIGN_OR_RETURN(LogisticProblem problem,
                     LogisticProblem::Create(dataset, config.lambda, options));
    ctx.logistic.emplace(std::move(problem));
  }
  for (double alpha : config.alphas) {
    ASSIGN_OR_RETURN(double theory,
                     TheoryEpsilon(ctx.theory_method, alpha, dataset.n(),
                                   dataset.p(), config.lambda));
    const double eps_min = config.grid.eps_min.value_or(1.0 / dataset.n());
    const double eps_max = config.grid.eps_max.value_or(4.0 * theory);
    ASSIGN_OR_RETURN(PrivacyGrid grid,
                     BuildGeometricGrid(eps_min, eps_max, config.grid.steps));
    ASSIGN_OR_RETURN(int steps, DoublingSteps(eps_min, eps_max));
    ctx.grids.push_back(std::move(grid));
    ctx.doubling_steps.push_back(steps);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrFormat(
        "cannot create output directory %s: %s", out_dir, ec.message()));
  }
  ExperimentOutputs outputs;
  outputs.records_path = (std::filesystem::path(out_dir) / "records.jsonl").string();
  outputs.summary_path = (std::filesystem::path(out_dir) / "summary.csv").string();
  std::ofstream records_out(outputs.records_path, std::ios::trunc);
  if (!records_out) {
    return absl::InternalError(
        absl::StrFormat("cannot write %s", outputs.records_path));
  }

  struct SweepTask {
    Approach approach;
    int alpha_index;
    int trial;
  };
  std::vector<SweepTask> tasks;
  for (Approach approach : config.approaches) {
    for (int a = 0; a < static_cast<int>(config.alphas.size()); ++a) {
      for (int trial = 0; trial < config.trials; ++trial) {
        tasks.push_back({approach, a, trial});
      }
    }
  }

  // Workers claim tasks in order; the sink writes the longest completed
  // prefix so the file stays ordered and parseable mid-sweep.
  std::vector<std::optional<TrialRecord>> done(tasks.size());
  std::vector<TrialRecord> written;
  written.reserve(tasks.size());
  size_t next_to_write = 0;
  std::mutex sink_mutex;
  std::atomic<size_t> next_task{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next_task.fetch_add(1);
      if (i >= tasks.size()) return;
      TrialRecord record =
          RunTrial(ctx, tasks[i].approach, tasks[i].alpha_index, tasks[i].trial);
      std::lock_guard<std::mutex> lock(sink_mutex);
      done[i] = std::move(record);
      while (next_to_write < tasks.size() && done[next_to_write]) {
        records_out << TrialRecordToJson(*done[next_to_write]) << "\n";
        written.push_back(*std::move(done[next_to_write]));
        done[next_to_write].reset();
        ++next_to_write;
      }
      records_out.flush();
    }
  };
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  records_out.close();
  if (!records_out) {
    return absl::InternalError(
        absl::StrFormat("failed writing %s", outputs.records_path));
  }

  std::ofstream summary_out(outputs.summary_path, std::ios::trunc);
  WriteSummaryCsv(Summarize(written), summary_out);
  summary_out.close();
  if (!summary_out) {
    return absl::InternalError(
        absl::StrFormat("failed writing %s", outputs.summary_path));
  }
  outputs.trials_run = static_cast<int>(written.size());
  for (const TrialRecord& r : written) {
    if (r.error.has_value()) ++outputs.trial_errors;
  }
  return outputs;
}

}  // namespace expost
