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

#include "expost/solvers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "Eigen/Eigenvalues"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

constexpr int kMaxSecularIterations = 300;

absl::Status CheckShapes(const Dataset& dataset,
                         const Eigen::VectorXd& theta) {
  if (dataset.n() == 0) {
    return absl::InvalidArgumentError("dataset is empty");
  }
  if (theta.size() != dataset.p()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("theta has dimension %d but the data has %d features",
                        theta.size(), dataset.p()));
  }
  return absl::OkStatus();
}

absl::Status CheckLambda(double lambda) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("lambda must be finite and nonnegative, got %g",
                        lambda));
  }
  return absl::OkStatus();
}

double KktResidualWithMinEigenvalue(const BallQuadratic& problem,
                                    const Eigen::VectorXd& theta, double mu,
                                    double min_eigenvalue) {
  const double norm = theta.norm();
  const double stationarity =
      (problem.a * theta + mu * theta - problem.b).norm();
  const double feasibility = std::max(0.0, norm - problem.radius);
  const double complementarity = std::abs(mu) * std::abs(problem.radius - norm);
  const double dual = std::max(0.0, -mu);
  const double curvature = std::max(0.0, -(min_eigenvalue + mu));
  return std::max({stationarity, feasibility, complementarity, dual,
                   curvature});
}

// Mean logistic loss and, optionally, its gradient (without regularizer).
double LogisticDataLoss(const Dataset& dataset, const Eigen::VectorXd& theta,
                        Eigen::VectorXd* gradient) {
  const Eigen::VectorXd margins =
      dataset.y().cwiseProduct(dataset.x() * theta);
  double loss = 0.0;
  Eigen::VectorXd weights(dataset.n());
  for (int i = 0; i < dataset.n(); ++i) {
    loss += Softplus(-margins[i]);
    // d/dm log(1 + exp(-m)) = -sigmoid(-m)
    weights[i] = -dataset.y()[i] / (1.0 + std::exp(margins[i]));
  }
  if (gradient != nullptr) {
    *gradient = dataset.x().transpose() * weights / dataset.n();
  }
  return loss / dataset.n();
}

}  // namespace

bool ProjectToBall(Eigen::VectorXd& theta, double radius) {
  const double norm = theta.norm();
  if (norm <= radius) return false;
  theta *= radius / norm;
  return true;
}

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

absl::StatusOr<double> RidgeObjective(const Dataset& dataset,
                                      const Eigen::VectorXd& theta,
                                      double lambda) {
  RETURN_IF_ERROR(CheckShapes(dataset, theta));
  RETURN_IF_ERROR(CheckLambda(lambda));
  const Eigen::VectorXd residual = dataset.y() - dataset.x() * theta;
  return residual.squaredNorm() / (2.0 * dataset.n()) +
         0.5 * lambda * theta.squaredNorm();
}

absl::StatusOr<double> LogisticObjective(const Dataset& dataset,
                                         const Eigen::VectorXd& theta,
                                         double lambda) {
  RETURN_IF_ERROR(CheckShapes(dataset, theta));
  RETURN_IF_ERROR(CheckLambda(lambda));
  return LogisticDataLoss(dataset, theta, nullptr) +
         0.5 * lambda * theta.squaredNorm();
}

Eigen::VectorXd LogisticGradient(const Dataset& dataset,
                                 const Eigen::VectorXd& theta, double lambda) {
  Eigen::VectorXd gradient;
  LogisticDataLoss(dataset, theta, &gradient);
  return gradient + lambda * theta;
}

absl::StatusOr<BallQuadratic> BallQuadratic::Create(Eigen::MatrixXd a,
                                                    Eigen::VectorXd b,
                                                    double radius,
                                                    double symmetry_tol) {
  if (a.rows() != a.cols() || a.rows() != b.size() || b.size() == 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("shape mismatch: A is %dx%d, b has %d entries",
                        a.rows(), a.cols(), b.size()));
  }
  if (!(radius > 0) || !std::isfinite(radius)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("radius must be finite and positive, got %g", radius));
  }
  if (!a.allFinite() || !b.allFinite()) {
    return absl::InvalidArgumentError("A and b must be finite");
  }
  const double asymmetry = (a - a.transpose()).cwiseAbs().maxCoeff();
  const double magnitude = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asymmetry > symmetry_tol * magnitude) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "A is not symmetric: max |A - A'| = %g", asymmetry));
  }
  Eigen::MatrixXd symmetric = 0.5 * (a + a.transpose());
  return BallQuadratic{std::move(symmetric), std::move(b), radius};
}

double BallQuadratic::Objective(const Eigen::VectorXd& theta) const {
  return 0.5 * theta.dot(a * theta) - b.dot(theta);
}

double KktResidual(const BallQuadratic& problem, const Eigen::VectorXd& theta,
                   double mu) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      problem.a, Eigen::EigenvaluesOnly);
  return KktResidualWithMinEigenvalue(problem, theta, mu,
                                      eig.eigenvalues()[0]);
}

absl::StatusOr<BallQuadraticSolution> MinimizeBallQuadratic(
    const BallQuadratic& problem, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.a);
  if (eig.info() != Eigen::Success) {
    return absl::InternalError("eigendecomposition failed");
  }
  const Eigen::VectorXd& d = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::VectorXd c = q.transpose() * problem.b;
  const double radius = problem.radius;
  const double d_min = d[0];
  const Eigen::Index p = d.size();

  auto finish = [&](const Eigen::VectorXd& coords, double mu,
                    bool hard_case) -> absl::StatusOr<BallQuadraticSolution> {
    BallQuadraticSolution solution;
    solution.theta = q * coords;
    solution.multiplier = mu;
    solution.hard_case = hard_case;
    solution.kkt_residual =
        KktResidualWithMinEigenvalue(problem, solution.theta, mu, d_min);
    if (!(solution.kkt_residual <= tol)) {
      return absl::InternalError(absl::StrFormat(
          "trust-region solve did not reach tolerance: KKT residual %g > %g",
          solution.kkt_residual, tol));
    }
    return solution;
  };

  // Interior solution of a positive definite system.
  if (d_min > 0) {
    Eigen::VectorXd coords = c.cwiseQuotient(d);
    if (coords.norm() <= radius) return finish(coords, 0.0, false);
  }

  // On the boundary mu = mu_floor + s with s >= 0, and the shifted
  // eigenvalues e_i = d_i + mu_floor are all nonnegative (e_0 = 0 exactly
  // when A is not positive definite).
  const double mu_floor = std::max(0.0, -d_min);
  Eigen::VectorXd e = d_min < 0 ? Eigen::VectorXd(d.array() - d_min) : d;
  e[0] = std::max(0.0, e[0]);

  // Hard case: b (numerically) has no weight on the bottom eigenspace and the
  // minimum-norm solution at mu_floor already fits inside the ball. Pad it
  // with a bottom eigenvector to reach the boundary.
  const double bottom_tol =
      1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff());
  if (e[0] <= bottom_tol) {
    Eigen::Index bottom = 0;
    while (bottom < p && e[bottom] <= bottom_tol) ++bottom;
    const double bottom_weight = c.head(bottom).norm();
    if (bottom_weight <= 0.01 * tol) {
      Eigen::VectorXd coords = Eigen::VectorXd::Zero(p);
      for (Eigen::Index i = bottom; i < p; ++i) coords[i] = c[i] / e[i];
      const double rest = coords.norm();
      if (rest <= radius) {
        coords[0] = std::sqrt(std::max(0.0, radius * radius - rest * rest));
        return finish(coords, mu_floor, true);
      }
    }
  }

  const double c_norm = c.norm();
  if (c_norm == 0) {
    return finish(Eigen::VectorXd::Zero(p), mu_floor, false);
  }

  // Secular equation phi(s) = 1/R - 1/||theta(s)||, decreasing in s, with
  // phi(0+) > 0 and phi(||c|| / R) <= 0.
  double lo = 0.0;
  double hi = c_norm / radius;
  double s = hi;
  for (int iter = 0; iter < kMaxSecularIterations; ++iter) {
    double norm_sq = 0.0;
    double slope_sq = 0.0;  // -d(norm_sq)/ds / 2
    for (Eigen::Index i = 0; i < p; ++i) {
      const double denom = e[i] + s;
      const double w = c[i] / denom;
      norm_sq += w * w;
      slope_sq += w * w / denom;
    }
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - radius) <= 1e-15 * radius) break;
    const double phi = 1.0 / radius - 1.0 / norm;
    if (phi > 0) {
      lo = s;
    } else {
      hi = s;
    }
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
    // d phi / ds = -(slope_sq) / norm^3
    const double derivative = -slope_sq / (norm_sq * norm);
    double next = s - phi / derivative;
    if (!(next > lo && next < hi)) {
      if (lo == 0) {
        next = hi / 8;
      } else if (hi > 16 * lo) {
        next = std::sqrt(lo * hi);
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    s = next;
  }

  Eigen::VectorXd coords(p);
  for (Eigen::Index i = 0; i < p; ++i) coords[i] = c[i] / (e[i] + s);
  bool hard_case = false;
  const double norm = coords.norm();
  if (norm < radius * (1 - 1e-12)) {
    // The root sits closer to the pole than floating point resolves; move
    // along the bottom eigenvector, which changes the stationarity residual
    // only by |tau| (e_0 + s).
    const double rest_sq = norm * norm - coords[0] * coords[0];
    const double target =
        std::sqrt(std::max(0.0, radius * radius - rest_sq));
    coords[0] = coords[0] < 0 ? -target : target;
    hard_case = true;
  }
  return finish(coords, mu_floor + s, hard_case);
}

absl::StatusOr<Hypothesis> MinimizeLogistic(const Dataset& dataset,
                                            double lambda,
                                            const LogisticOptions& options) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("lambda must be positive, got %g", lambda));
  }
  if (dataset.n() == 0 || dataset.p() == 0) {
    return absl::InvalidArgumentError("dataset is empty");
  }
  const double norm_cap = std::sqrt(2.0 * std::log(2.0) / lambda);

  // Global smoothness constant: sigmoid' <= 1/4.
  const double max_row_sq = dataset.x().rowwise().squaredNorm().maxCoeff();
  const double safe_step = 1.0 / (0.25 * max_row_sq + lambda);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dataset.p());
  Eigen::VectorXd gradient;
  double loss = LogisticDataLoss(dataset, theta, &gradient) +
                0.5 * lambda * theta.squaredNorm();
  gradient += lambda * theta;
  double step = safe_step;
  double grad_norm = gradient.norm();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (grad_norm <= options.tol) {
      return Hypothesis{std::move(theta), norm_cap};
    }
    step *= 2;
    const double grad_sq = grad_norm * grad_norm;
    Eigen::VectorXd candidate;
    double candidate_loss = 0.0;
    while (true) {
      if (step <= safe_step) step = safe_step;
      candidate = theta - step * gradient;
      candidate_loss = LogisticDataLoss(dataset, candidate, nullptr) +
                       0.5 * lambda * candidate.squaredNorm();
      // Steps of at most 1/L always decrease the loss, so the Armijo test is
      // skipped there; it cannot be resolved near the optimum anyway.
      if (step == safe_step ||
          candidate_loss <= loss - 0.5 * step * grad_sq) {
        break;
      }
      step *= 0.5;
    }
    theta = std::move(candidate);
    loss = LogisticDataLoss(dataset, theta, &gradient) +
           0.5 * lambda * theta.squaredNorm();
    gradient += lambda * theta;
    grad_norm = gradient.norm();
  }
  if (grad_norm <= options.tol) {
    return Hypothesis{std::move(theta), norm_cap};
  }
  return absl::ResourceExhaustedError(absl::StrFormat(
      "logistic solver did not converge in %d iterations: gradient norm %g",
      options.max_iterations, grad_norm));
}

}  // namespace expost
