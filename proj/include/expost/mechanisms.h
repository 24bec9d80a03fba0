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

// Private ERM mechanisms for ridge and logistic regression, and the
// accuracy-first pipelines that pair a noise-reduction chain with an
// above-threshold test on the excess risk.

#ifndef EXPOST_MECHANISMS_H_
#define EXPOST_MECHANISMS_H_

#include <memory>
#include <optional>
#include <string>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "expost/accountant.h"
#include "expost/data.h"
#include "expost/laplace.h"
#include "expost/random.h"
#include "expost/solvers.h"

namespace expost {

// l1 sensitivity of X'X and of X'y (entrywise) under row replacement.
inline constexpr double kMomentSensitivity = 2.0;

// Norm caps M on the exact minimizers.
double RidgeNormCap(double lambda);     // 1 / sqrt(lambda)
double LogisticNormCap(double lambda);  // sqrt(2 ln 2 / lambda)

// Sensitivity of the excess-risk query L(theta*) - L(theta).
absl::StatusOr<double> RidgeQuerySensitivity(double lambda, int n);
absl::StatusOr<double> LogisticQuerySensitivity(double lambda, int n);

// l1 sensitivity of the exact logistic minimizer: 2 sqrt(p) / (n lambda).
absl::StatusOr<double> LogisticSolutionSensitivity(double lambda, int n,
                                                   int p);
// l1 sensitivity of the constrained ridge minimizer:
// (M + 1) sqrt(p / (n lambda)).
absl::StatusOr<double> RidgeSolutionSensitivity(double lambda, int n, int p);

struct SensitivitySpec {
  double query_delta = 0.0;
  double moment_delta = kMomentSensitivity;
  double solution_delta = 0.0;
};

absl::StatusOr<SensitivitySpec> RidgeSensitivities(double lambda, int n,
                                                   int p);
absl::StatusOr<SensitivitySpec> LogisticSensitivities(double lambda, int n,
                                                      int p);

// A regularized ERM instance on a finalized dataset, with the exact
// minimizer cached. Loss values are the regularized empirical objective.
class ErmProblem {
 public:
  virtual ~ErmProblem() = default;

  virtual double Loss(const Eigen::VectorXd& theta) const = 0;
  virtual double NormCap() const = 0;
  virtual double QuerySensitivity() const = 0;

  const Dataset& dataset() const { return *dataset_; }
  double lambda() const { return lambda_; }
  int n() const { return dataset_->n(); }
  int p() const { return dataset_->p(); }
  const Eigen::VectorXd& optimum() const { return optimum_; }
  double optimal_loss() const { return optimal_loss_; }

  // L(theta) - L(theta*); nonnegative up to solver tolerance.
  double ExcessRisk(const Eigen::VectorXd& theta) const {
    return Loss(theta) - optimal_loss_;
  }

 protected:
  ErmProblem(std::shared_ptr<const Dataset> dataset, double lambda)
      : dataset_(std::move(dataset)), lambda_(lambda) {}

  std::shared_ptr<const Dataset> dataset_;
  double lambda_;
  Eigen::VectorXd optimum_;
  double optimal_loss_ = 0.0;
};

// Ridge regression; the loss is evaluated from sufficient statistics.
class RidgeProblem : public ErmProblem {
 public:
  static absl::StatusOr<RidgeProblem> Create(Dataset dataset, double lambda);

  double Loss(const Eigen::VectorXd& theta) const override;
  double NormCap() const override { return RidgeNormCap(lambda_); }
  double QuerySensitivity() const override { return query_delta_; }

  const Eigen::MatrixXd& gram() const { return gram_; }    // X'X
  const Eigen::VectorXd& cross() const { return cross_; }  // X'y

 private:
  RidgeProblem(std::shared_ptr<const Dataset> dataset, double lambda)
      : ErmProblem(std::move(dataset), lambda) {}

  Eigen::MatrixXd gram_;
  Eigen::VectorXd cross_;
  double label_sq_ = 0.0;
  double query_delta_ = 0.0;
};

// Logistic regression on +-1 labels.
class LogisticProblem : public ErmProblem {
 public:
  static absl::StatusOr<LogisticProblem> Create(
      Dataset dataset, double lambda,
      const LogisticOptions& options = LogisticOptions());

  double Loss(const Eigen::VectorXd& theta) const override;
  double NormCap() const override { return LogisticNormCap(lambda_); }
  double QuerySensitivity() const override { return query_delta_; }

 private:
  LogisticProblem(std::shared_ptr<const Dataset> dataset, double lambda)
      : ErmProblem(std::move(dataset), lambda) {}

  double query_delta_ = 0.0;
};

// Solver tolerance tied to the accuracy target: min(1e-6, sqrt(lambda *
// alpha / 100)).
double LogisticToleranceFor(double lambda, double alpha);

struct NoisyCovariance {
  Eigen::MatrixXd second_moment;  // Z = X'X + B
  Eigen::VectorXd cross_moment;   // z = X'y + b
  double level = 0.0;
};

// Adds i.i.d. Lap(4 / eps) to every entry of X'X and X'y.
absl::StatusOr<NoisyCovariance> PerturbCovariance(const RidgeProblem& problem,
                                                  double eps,
                                                  RandomSource& rng);

// argmin over ||theta|| <= 1/sqrt(lambda) of
// theta' (Z/n + lambda I) theta / 2 - <z/n, theta>.
absl::StatusOr<Hypothesis> SolveNoisyRidge(const Eigen::MatrixXd& second_moment,
                                           const Eigen::VectorXd& cross_moment,
                                           int n, double lambda);

absl::StatusOr<Hypothesis> CovariancePerturb(const RidgeProblem& problem,
                                             double eps, RandomSource& rng);
absl::StatusOr<Hypothesis> CovariancePerturb(const Dataset& dataset,
                                             double eps, double lambda,
                                             RandomSource& rng);

// theta* + Lap(2 sqrt(p) / (n lambda eps)) per coordinate.
absl::StatusOr<Hypothesis> OutputPerturbLogistic(
    const LogisticProblem& problem, double eps, RandomSource& rng);
absl::StatusOr<Hypothesis> OutputPerturbLogistic(const Dataset& dataset,
                                                 double eps, double lambda,
                                                 RandomSource& rng);

// theta* + Lap((M + 1) sqrt(p / (n lambda)) / eps) per coordinate.
absl::StatusOr<Hypothesis> OutputPerturbRidge(const RidgeProblem& problem,
                                              double eps, RandomSource& rng);
absl::StatusOr<Hypothesis> OutputPerturbRidge(const Dataset& dataset,
                                              double eps, double lambda,
                                              RandomSource& rng);

struct PipelineOptions {
  double alpha = 0.1;
  double gamma = 0.1;
  // Release the non-private theta* when the test never halts.
  bool release_nonprivate = false;
};

struct PipelineResult {
  ExPostRecord record;
  // Empty at bottom unless release_nonprivate was set.
  std::optional<Hypothesis> hypothesis;
  // Excess risk of the released hypothesis (a non-private diagnostic).
  std::optional<double> excess_risk;
  // Number of hypotheses materialized before the run stopped.
  int hypotheses_generated = 0;
  bool released_nonprivate = false;
};

// Ridge: two noise-reduction chains on X'X and X'y at half of each level,
// a trust-region solve per level, and an above-threshold test at -alpha/2.
absl::StatusOr<PipelineResult> CovNr(const RidgeProblem& problem,
                                     const PrivacyGrid& grid,
                                     const PipelineOptions& options,
                                     RandomSource& rng);

// Logistic: a noise-reduction chain directly on theta*, each level projected
// onto the M-ball, tested the same way.
absl::StatusOr<PipelineResult> OutputNr(const LogisticProblem& problem,
                                        const PrivacyGrid& grid,
                                        const PipelineOptions& options,
                                        RandomSource& rng);

enum class TheoryMethod { kCovRidge, kOutRidge, kOutLogistic };

absl::StatusOr<TheoryMethod> ParseTheoryMethod(const std::string& name);
std::string TheoryMethodName(TheoryMethod method);

// Expected excess-risk upper bound of the single-shot mechanism at eps.
absl::StatusOr<double> TheoryExcessRiskBound(TheoryMethod method, double eps,
                                             int n, int p, double lambda);

// Smallest eps whose expected excess-risk bound equals alpha.
absl::StatusOr<double> TheoryEpsilon(TheoryMethod method, double alpha, int n,
                                     int p, double lambda);

}  // namespace expost

#endif  // EXPOST_MECHANISMS_H_
