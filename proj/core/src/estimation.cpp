// Copyright 2026 The lcsw Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcsw/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace lcsw {

double log_det_spd(const MatrixXd& S) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("log_det_spd: not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

EstimatorState init_estimator(double lambda, int n, int d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("init_estimator: lambda must be positive");
  EstimatorState s;
  s.lambda = lambda;
  s.V = lambda * MatrixXd::Identity(n + d, n + d);
  s.prior_shape = s.V;
  s.prior_center = MatrixXd::Zero(n + d, n);
  s.zx_accum = MatrixXd::Zero(n + d, n);
  s.prior_logdet = (n + d) * std::log(lambda);
  return s;
}

EstimatorState init_estimator(const ConfidenceEllipsoid& prior) {
  const auto p = prior.shape.rows();
  if (prior.shape.cols() != p || prior.center.rows() != p)
    throw std::invalid_argument("init_estimator: prior dimension mismatch");
  EstimatorState s;
  s.prior_logdet = log_det_spd(prior.shape);  // throws on non-PD
  s.V = prior.shape;
  s.prior_shape = prior.shape;
  s.prior_center = prior.center;
  s.prior_radius = prior.radius;
  s.has_prior = true;
  s.zx_accum = MatrixXd::Zero(p, prior.center.cols());
  s.lambda = Eigen::SelfAdjointEigenSolver<MatrixXd>(prior.shape, Eigen::EigenvaluesOnly)
                 .eigenvalues()(0);
  return s;
}

void absorb_observation(EstimatorState& state, const VectorXd& z, const VectorXd& x_next) {
  if (z.size() != state.V.rows() || x_next.size() != state.zx_accum.cols())
    throw std::invalid_argument("absorb_observation: dimension mismatch");
  state.V.noalias() += (1.0 / state.beta) * z * z.transpose();
  state.zx_accum.noalias() += z * x_next.transpose();
  ++state.count;
}

CenterEstimate center_estimate(const EstimatorState& state) {
  CenterEstimate out;
  Eigen::LLT<MatrixXd> llt(state.V);
  if (llt.info() != Eigen::Success) throw std::runtime_error("center_estimate: V not positive definite");
  out.theta = llt.solve(state.zx_accum + state.prior_shape * state.prior_center);
  const VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  const double cond_est = std::pow(d.maxCoeff() / d.minCoeff(), 2);
  out.ill_conditioned = cond_est > 1e14;
  return out;
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

double noise_term(double sigma_w, int n, double delta, double logdet_ratio) {
  const double arg = std::log(n / delta) + logdet_ratio;
  return sigma_w * std::sqrt(2.0 * n * std::max(arg, 0.0));
}

}  // namespace

double radius_warmup(const EstimatorState& state, double delta, double theta_bound,
                     double sigma_w) {
  check_delta(delta);
  const int n = static_cast<int>(state.zx_accum.cols());
  const int p = static_cast<int>(state.V.rows());
  const double ratio = log_det_spd(state.V) - p * std::log(state.lambda);
  const double s = noise_term(sigma_w, n, delta, ratio) + std::sqrt(state.lambda) * theta_bound;
  return s * s;
}

double radius_inherited(const EstimatorState& state, double delta, double sigma_w) {
  check_delta(delta);
  if (!state.has_prior) throw std::logic_error("radius_inherited: estimator has no inherited prior");
  const int n = static_cast<int>(state.zx_accum.cols());
  const double ratio = log_det_spd(state.V) - state.prior_logdet;
  const double s = noise_term(sigma_w, n, delta, ratio) + std::sqrt(state.prior_radius);
  return s * s;
}

double radius(const EstimatorState& state, double delta, double theta_bound, double sigma_w) {
  return state.has_prior ? radius_inherited(state, delta, sigma_w)
                         : radius_warmup(state, delta, theta_bound, sigma_w);
}

ConfidenceEllipsoid current_ellipsoid(const EstimatorState& state, double delta,
                                      double theta_bound, double sigma_w) {
  ConfidenceEllipsoid e;
  e.center = center_estimate(state).theta;
  e.shape = state.V;
  e.radius = radius(state, delta, theta_bound, sigma_w);
  e.dim_d = static_cast<int>(state.V.rows() - state.zx_accum.cols());
  return e;
}

double ellipsoid_distance(const ConfidenceEllipsoid& e, const MatrixXd& theta) {
  if (theta.rows() != e.center.rows() || theta.cols() != e.center.cols())
    throw std::invalid_argument("contains: dimension mismatch");
  const MatrixXd D = theta - e.center;
  return (D.transpose() * e.shape * D).trace();
}

bool contains(const ConfidenceEllipsoid& e, const MatrixXd& theta) {
  return ellipsoid_distance(e, theta) <= e.radius + 1e-12;
}

double rbar_upper_bound(int n, int m, double delta, double sigma_w, double upsilon_bar,
                        double T, double epsilon, double lambda) {
  const double g = 1.0 + 2.0 * upsilon_bar;
  return 8.0 * sigma_w * sigma_w * n *
             (2.0 * std::log(n / delta) + g * std::log(T) + (m - 1) * std::log(g * T)) +
         2.0 * epsilon * lambda;
}

double upsilon_bar(double kappa_star, double chi, double sigma_w, int n, double T, double delta) {
  return 3200.0 * std::pow(kappa_star, 6) * sigma_w * sigma_w * n * std::log(T / delta) /
         (chi * chi);
}

}  // namespace lcsw
