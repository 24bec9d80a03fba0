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

// Deterministic optimization for the two regularized losses:
//
//   ridge:    L(theta) = ||y - X theta||^2 / (2n) + lambda ||theta||^2 / 2
//   logistic: L(theta) = mean_i log(1 + exp(-y_i <theta, X_i>))
//                        + lambda ||theta||^2 / 2
//
// The noisy ridge problem has a possibly indefinite Hessian, so it is solved
// as a trust-region subproblem over an l2 ball.

#ifndef EXPOST_SOLVERS_H_
#define EXPOST_SOLVERS_H_

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "expost/data.h"

namespace expost {

struct Hypothesis {
  Eigen::VectorXd theta;
  double norm_cap = 0.0;  // M: radius of the ball the hypothesis lives in
};

// Scales `theta` down onto the ball of radius `radius` if it lies outside.
// Returns true if it was rescaled.
bool ProjectToBall(Eigen::VectorXd& theta, double radius);

absl::StatusOr<double> RidgeObjective(const Dataset& dataset,
                                      const Eigen::VectorXd& theta,
                                      double lambda);
absl::StatusOr<double> LogisticObjective(const Dataset& dataset,
                                         const Eigen::VectorXd& theta,
                                         double lambda);

// Numerically stable log(1 + exp(z)).
double Softplus(double z);

// minimize  q(theta) = theta' A theta / 2 - <b, theta>  s.t. ||theta|| <= R.
struct BallQuadratic {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double radius = 0.0;

  // Validates shapes and symmetry (max |A - A'| <= symmetry_tol * max(1,
  // max |A|)) and stores the exactly symmetrized A.
  static absl::StatusOr<BallQuadratic> Create(Eigen::MatrixXd a,
                                              Eigen::VectorXd b, double radius,
                                              double symmetry_tol = 1e-10);

  double Objective(const Eigen::VectorXd& theta) const;
};

struct BallQuadraticSolution {
  Eigen::VectorXd theta;
  double multiplier = 0.0;    // mu >= 0 with (A + mu I) theta = b
  double kkt_residual = 0.0;  // see KktResidual
  bool hard_case = false;
};

// Largest violation of the trust-region optimality conditions at
// (theta, mu): stationarity ||(A + mu I) theta - b||, feasibility
// max(0, ||theta|| - R), complementarity mu |R - ||theta|||, dual
// feasibility max(0, -mu) and curvature max(0, -(lambda_min(A) + mu)).
double KktResidual(const BallQuadratic& problem, const Eigen::VectorXd& theta,
                   double mu);

inline constexpr double kDefaultKktTolerance = 1e-8;

// Global minimizer of a ball-constrained quadratic. Uses an
// eigendecomposition of A and a safeguarded Newton iteration on the secular
// equation 1/R - 1/||theta(mu)|| = 0 (More-Sorensen), and handles the hard
// case where b has no component along the bottom eigenspace. Fails with
// kInternal if the final KKT residual exceeds `tol`.
absl::StatusOr<BallQuadraticSolution> MinimizeBallQuadratic(
    const BallQuadratic& problem, double tol = kDefaultKktTolerance);

struct LogisticOptions {
  double tol = 1e-8;  // on ||grad L||_2
  int max_iterations = 100000;
};

// Full-batch gradient descent with Armijo backtracking, started at zero.
// On return ||grad L(theta)|| <= tol, so by lambda-strong convexity
// L(theta) - L(theta*) <= tol^2 / (2 lambda). Fails with kResourceExhausted
// (message carries the final gradient norm) if the iteration cap is hit.
absl::StatusOr<Hypothesis> MinimizeLogistic(
    const Dataset& dataset, double lambda,
    const LogisticOptions& options = LogisticOptions());

// Gradient of the logistic objective.
Eigen::VectorXd LogisticGradient(const Dataset& dataset,
                                 const Eigen::VectorXd& theta, double lambda);

}  // namespace expost

#endif  // EXPOST_SOLVERS_H_
