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

#include "expost/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/iat.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

absl::Status CheckLambdaN(double lambda, int n) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("lambda must be finite and positive, got %g", lambda));
  }
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n must be at least 1, got %d", n));
  }
  return absl::OkStatus();
}

absl::Status CheckEps(double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps must be finite and positive, got %g", eps));
  }
  return absl::OkStatus();
}

absl::Status CheckPipeline(const PipelineOptions& options) {
  if (!(options.alpha > 0) || !std::isfinite(options.alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be positive, got %g", options.alpha));
  }
  if (!(options.gamma > 0 && options.gamma < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1), got %g", options.gamma));
  }
  return absl::OkStatus();
}

void AddLaplaceNoise(Eigen::VectorXd& v, double scale, RandomSource& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] += internal::DrawLaplace(scale, rng);
  }
}

// Shared tail of both pipelines: accounting and release policy.
absl::StatusOr<PipelineResult> Conclude(const ErmProblem& problem,
                                        const PrivacyGrid& grid, double eps_a,
                                        const IatOutcome& outcome,
                                        std::optional<Hypothesis> last,
                                        int generated,
                                        const PipelineOptions& options) {
  PipelineResult result;
  std::optional<int> stop;
  if (outcome.halted) stop = outcome.stop_index;
  ASSIGN_OR_RETURN(result.record, ExPostLoss(stop, eps_a, grid));
  result.hypotheses_generated = generated;
  if (outcome.halted) {
    result.excess_risk = problem.ExcessRisk(last->theta);
    result.hypothesis = std::move(last);
  } else if (options.release_nonprivate) {
    result.hypothesis = Hypothesis{problem.optimum(), problem.NormCap()};
    result.excess_risk = 0.0;
    result.released_nonprivate = true;
  }
  return result;
}

}  // namespace

double RidgeNormCap(double lambda) { return 1.0 / std::sqrt(lambda); }

double LogisticNormCap(double lambda) {
  return std::sqrt(2.0 * std::log(2.0) / lambda);
}

absl::StatusOr<double> RidgeQuerySensitivity(double lambda, int n) {
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  const double m = RidgeNormCap(lambda);
  return (m + 1) * (m + 1) / n;
}

absl::StatusOr<double> LogisticQuerySensitivity(double lambda, int n) {
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  const double m = LogisticNormCap(lambda);
  // ln((1 + e^M) / (1 + e^-M)) = softplus(M) - softplus(-M) = M exactly in
  // real arithmetic; evaluated as written to keep the rounding honest.
  return 2.0 * (Softplus(m) - Softplus(-m)) / n;
}

absl::StatusOr<double> LogisticSolutionSensitivity(double lambda, int n,
                                                   int p) {
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  if (p < 1) return absl::InvalidArgumentError("p must be at least 1");
  return 2.0 * std::sqrt(static_cast<double>(p)) / (n * lambda);
}

absl::StatusOr<double> RidgeSolutionSensitivity(double lambda, int n, int p) {
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  if (p < 1) return absl::InvalidArgumentError("p must be at least 1");
  return (RidgeNormCap(lambda) + 1) *
         std::sqrt(static_cast<double>(p) / (n * lambda));
}

absl::StatusOr<SensitivitySpec> RidgeSensitivities(double lambda, int n,
                                                   int p) {
  SensitivitySpec spec;
  ASSIGN_OR_RETURN(spec.query_delta, RidgeQuerySensitivity(lambda, n));
  ASSIGN_OR_RETURN(spec.solution_delta,
                   RidgeSolutionSensitivity(lambda, n, p));
  return spec;
}

absl::StatusOr<SensitivitySpec> LogisticSensitivities(double lambda, int n,
                                                      int p) {
  SensitivitySpec spec;
  ASSIGN_OR_RETURN(spec.query_delta, LogisticQuerySensitivity(lambda, n));
  ASSIGN_OR_RETURN(spec.solution_delta,
                   LogisticSolutionSensitivity(lambda, n, p));
  return spec;
}

absl::StatusOr<RidgeProblem> RidgeProblem::Create(Dataset dataset,
                                                  double lambda) {
  RETURN_IF_ERROR(RequireFinalized(dataset));
  RETURN_IF_ERROR(CheckLambdaN(lambda, dataset.n()));
  RidgeProblem problem(std::make_shared<const Dataset>(std::move(dataset)),
                       lambda);
  const Dataset& d = *problem.dataset_;
  problem.gram_ = d.x().transpose() * d.x();
  problem.cross_ = d.x().transpose() * d.y();
  problem.label_sq_ = d.y().squaredNorm();
  ASSIGN_OR_RETURN(problem.query_delta_, RidgeQuerySensitivity(lambda, d.n()));
  ASSIGN_OR_RETURN(Hypothesis optimum,
                   SolveNoisyRidge(problem.gram_, problem.cross_, d.n(),
                                   lambda));
  problem.optimum_ = std::move(optimum.theta);
  problem.optimal_loss_ = problem.Loss(problem.optimum_);
  return problem;
}

double RidgeProblem::Loss(const Eigen::VectorXd& theta) const {
  const double residual_sq =
      label_sq_ - 2.0 * theta.dot(cross_) + theta.dot(gram_ * theta);
  return residual_sq / (2.0 * n()) + 0.5 * lambda_ * theta.squaredNorm();
}

absl::StatusOr<LogisticProblem> LogisticProblem::Create(
    Dataset dataset, double lambda, const LogisticOptions& options) {
  RETURN_IF_ERROR(RequireFinalized(dataset));
  if (dataset.task() != Task::kClassification) {
    return absl::InvalidArgumentError(
        "logistic regression needs a classification dataset");
  }
  RETURN_IF_ERROR(CheckLambdaN(lambda, dataset.n()));
  LogisticProblem problem(std::make_shared<const Dataset>(std::move(dataset)),
                          lambda);
  ASSIGN_OR_RETURN(problem.query_delta_,
                   LogisticQuerySensitivity(lambda, problem.n()));
  ASSIGN_OR_RETURN(Hypothesis optimum,
                   MinimizeLogistic(*problem.dataset_, lambda, options));
  problem.optimum_ = std::move(optimum.theta);
  problem.optimal_loss_ = problem.Loss(problem.optimum_);
  return problem;
}

double LogisticProblem::Loss(const Eigen::VectorXd& theta) const {
  return LogisticObjective(*dataset_, theta, lambda_).value();
}

double LogisticToleranceFor(double lambda, double alpha) {
  return std::min(1e-6, std::sqrt(lambda * alpha / 100.0));
}

absl::StatusOr<NoisyCovariance> PerturbCovariance(const RidgeProblem& problem,
                                                  double eps,
                                                  RandomSource& rng) {
  RETURN_IF_ERROR(CheckEps(eps));
  // Joint l1 sensitivity of (X'X, X'y) is 2 + 2.
  const double scale = 2.0 * kMomentSensitivity / eps;
  NoisyCovariance noisy{problem.gram(), problem.cross(), eps};
  for (Eigen::Index i = 0; i < noisy.second_moment.rows(); ++i) {
    for (Eigen::Index j = 0; j < noisy.second_moment.cols(); ++j) {
      noisy.second_moment(i, j) += internal::DrawLaplace(scale, rng);
    }
  }
  AddLaplaceNoise(noisy.cross_moment, scale, rng);
  return noisy;
}

absl::StatusOr<Hypothesis> SolveNoisyRidge(const Eigen::MatrixXd& second_moment,
                                           const Eigen::VectorXd& cross_moment,
                                           int n, double lambda) {
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  const Eigen::Index p = cross_moment.size();
  if (second_moment.rows() != p || second_moment.cols() != p) {
    return absl::InvalidArgumentError("moment dimensions disagree");
  }
  Eigen::MatrixXd a = (second_moment + second_moment.transpose()) / (2.0 * n);
  a.diagonal().array() += lambda;
  const double radius = RidgeNormCap(lambda);
  ASSIGN_OR_RETURN(BallQuadratic problem,
                   BallQuadratic::Create(std::move(a), cross_moment / n,
                                         radius));
  ASSIGN_OR_RETURN(BallQuadraticSolution solution,
                   MinimizeBallQuadratic(problem));
  ProjectToBall(solution.theta, radius);
  return Hypothesis{std::move(solution.theta), radius};
}

absl::StatusOr<Hypothesis> CovariancePerturb(const RidgeProblem& problem,
                                             double eps, RandomSource& rng) {
  ASSIGN_OR_RETURN(NoisyCovariance noisy, PerturbCovariance(problem, eps, rng));
  return SolveNoisyRidge(noisy.second_moment, noisy.cross_moment, problem.n(),
                         problem.lambda());
}

absl::StatusOr<Hypothesis> CovariancePerturb(const Dataset& dataset,
                                             double eps, double lambda,
                                             RandomSource& rng) {
  ASSIGN_OR_RETURN(RidgeProblem problem, RidgeProblem::Create(dataset, lambda));
  return CovariancePerturb(problem, eps, rng);
}

absl::StatusOr<Hypothesis> OutputPerturbLogistic(
    const LogisticProblem& problem, double eps, RandomSource& rng) {
  RETURN_IF_ERROR(CheckEps(eps));
  ASSIGN_OR_RETURN(double delta,
                   LogisticSolutionSensitivity(problem.lambda(), problem.n(),
                                               problem.p()));
  Eigen::VectorXd theta = problem.optimum();
  AddLaplaceNoise(theta, delta / eps, rng);
  return Hypothesis{std::move(theta), problem.NormCap()};
}

absl::StatusOr<Hypothesis> OutputPerturbLogistic(const Dataset& dataset,
                                                 double eps, double lambda,
                                                 RandomSource& rng) {
  ASSIGN_OR_RETURN(LogisticProblem problem,
                   LogisticProblem::Create(dataset, lambda));
  return OutputPerturbLogistic(problem, eps, rng);
}

absl::StatusOr<Hypothesis> OutputPerturbRidge(const RidgeProblem& problem,
                                              double eps, RandomSource& rng) {
  RETURN_IF_ERROR(CheckEps(eps));
  ASSIGN_OR_RETURN(double delta,
                   RidgeSolutionSensitivity(problem.lambda(), problem.n(),
                                            problem.p()));
  Eigen::VectorXd theta = problem.optimum();
  AddLaplaceNoise(theta, delta / eps, rng);
  return Hypothesis{std::move(theta), problem.NormCap()};
}

absl::StatusOr<Hypothesis> OutputPerturbRidge(const Dataset& dataset,
                                              double eps, double lambda,
                                              RandomSource& rng) {
  ASSIGN_OR_RETURN(RidgeProblem problem, RidgeProblem::Create(dataset, lambda));
  return OutputPerturbRidge(problem, eps, rng);
}

absl::StatusOr<PipelineResult> CovNr(const RidgeProblem& problem,
                                     const PrivacyGrid& grid,
                                     const PipelineOptions& options,
                                     RandomSource& rng) {
  RETURN_IF_ERROR(CheckPipeline(options));
  const int steps = grid.size();
  const double delta = problem.QuerySensitivity();
  ASSIGN_OR_RETURN(double eps_a,
                   IatEpsilonFor(delta, steps, options.gamma, options.alpha));

  // Each moment gets half of every level; together they compose to eps_t.
  const PrivacyGrid half = grid.Scaled(0.5);
  const Eigen::Index p = problem.p();
  const Eigen::VectorXd flat_gram =
      Eigen::Map<const Eigen::VectorXd>(problem.gram().data(), p * p);
  ASSIGN_OR_RETURN(NoiseChain gram_chain,
                   NoiseReduce(flat_gram, kMomentSensitivity, half, rng));
  ASSIGN_OR_RETURN(NoiseChain cross_chain,
                   NoiseReduce(problem.cross(), kMomentSensitivity, half, rng));

  std::optional<Hypothesis> last;
  int generated = 0;
  QueryStream queries =
      [&](int t) -> absl::StatusOr<std::optional<double>> {
    const Eigen::Map<const Eigen::MatrixXd> z(gram_chain.values[t - 1].data(),
                                              p, p);
    ASSIGN_OR_RETURN(Hypothesis h,
                     SolveNoisyRidge(z, cross_chain.values[t - 1], problem.n(),
                                     problem.lambda()));
    ++generated;
    const double value = -problem.ExcessRisk(h.theta);
    last = std::move(h);
    return value;
  };
  const IatConfig config{eps_a, -options.alpha / 2, delta, steps,
                         options.gamma};
  ASSIGN_OR_RETURN(IatOutcome outcome, RunIat(config, queries, rng));
  return Conclude(problem, grid, eps_a, outcome, std::move(last), generated,
                  options);
}

absl::StatusOr<PipelineResult> OutputNr(const LogisticProblem& problem,
                                        const PrivacyGrid& grid,
                                        const PipelineOptions& options,
                                        RandomSource& rng) {
  RETURN_IF_ERROR(CheckPipeline(options));
  const int steps = grid.size();
  const double delta = problem.QuerySensitivity();
  ASSIGN_OR_RETURN(double eps_a,
                   IatEpsilonFor(delta, steps, options.gamma, options.alpha));
  ASSIGN_OR_RETURN(double solution_delta,
                   LogisticSolutionSensitivity(problem.lambda(), problem.n(),
                                               problem.p()));
  ASSIGN_OR_RETURN(NoiseChain chain,
                   NoiseReduce(problem.optimum(), solution_delta, grid, rng));

  const double cap = problem.NormCap();
  std::optional<Hypothesis> last;
  int generated = 0;
  QueryStream queries =
      [&](int t) -> absl::StatusOr<std::optional<double>> {
    Hypothesis h{chain.values[t - 1], cap};
    ProjectToBall(h.theta, cap);
    ++generated;
    const double value = -problem.ExcessRisk(h.theta);
    last = std::move(h);
    return value;
  };
  const IatConfig config{eps_a, -options.alpha / 2, delta, steps,
                         options.gamma};
  ASSIGN_OR_RETURN(IatOutcome outcome, RunIat(config, queries, rng));
  return Conclude(problem, grid, eps_a, outcome, std::move(last), generated,
                  options);
}

absl::StatusOr<TheoryMethod> ParseTheoryMethod(const std::string& name) {
  if (name == "cov-ridge") return TheoryMethod::kCovRidge;
  if (name == "out-ridge") return TheoryMethod::kOutRidge;
  if (name == "out-logistic") return TheoryMethod::kOutLogistic;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown theory method '%s'", name));
}

std::string TheoryMethodName(TheoryMethod method) {
  switch (method) {
    case TheoryMethod::kCovRidge:
      return "cov-ridge";
    case TheoryMethod::kOutRidge:
      return "out-ridge";
    case TheoryMethod::kOutLogistic:
      return "out-logistic";
  }
  return "unknown";
}

absl::StatusOr<double> TheoryExcessRiskBound(TheoryMethod method, double eps,
                                             int n, int p, double lambda) {
  RETURN_IF_ERROR(CheckEps(eps));
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  if (p < 1) return absl::InvalidArgumentError("p must be at least 1");
  const double nd = n;
  const double pd = p;
  switch (method) {
    case TheoryMethod::kCovRidge:
      return 4.0 * std::sqrt(2.0) *
             (2.0 * std::sqrt(pd / lambda) + pd / lambda) / (nd * eps);
    case TheoryMethod::kOutRidge: {
      const double m1 = RidgeNormCap(lambda) + 1;
      return (1.0 / nd + lambda) * m1 * m1 * pd * pd /
             (nd * lambda * eps * eps);
    }
    case TheoryMethod::kOutLogistic:
      return 2.0 * std::sqrt(2.0) * pd / (nd * lambda * eps) +
             4.0 * pd * pd / (nd * nd * lambda * eps * eps);
  }
  return absl::InvalidArgumentError("unknown theory method");
}

absl::StatusOr<double> TheoryEpsilon(TheoryMethod method, double alpha, int n,
                                     int p, double lambda) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be positive, got %g", alpha));
  }
  RETURN_IF_ERROR(CheckLambdaN(lambda, n));
  if (p < 1) return absl::InvalidArgumentError("p must be at least 1");
  const double nd = n;
  const double pd = p;
  switch (method) {
    case TheoryMethod::kCovRidge:
      return 4.0 * std::sqrt(2.0) *
             (2.0 * std::sqrt(pd / lambda) + pd / lambda) / (nd * alpha);
    case TheoryMethod::kOutRidge: {
      const double m1 = RidgeNormCap(lambda) + 1;
      return std::sqrt((1.0 / nd + lambda) * m1 * m1 * pd * pd /
                       (nd * lambda * alpha));
    }
    case TheoryMethod::kOutLogistic: {
      // a u^2 + b u = alpha with u = 1/eps; the rationalized positive root
      // avoids cancellation when a is tiny.
      const double a = 4.0 * pd * pd / (nd * nd * lambda);
      const double b = 2.0 * std::sqrt(2.0) * pd / (nd * lambda);
      const double u = 2.0 * alpha / (b + std::sqrt(b * b + 4.0 * a * alpha));
      return 1.0 / u;
    }
  }
  return absl::InvalidArgumentError("unknown theory method");
}

}  // namespace expost
