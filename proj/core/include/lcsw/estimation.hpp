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

// Regularized least squares with self-normalized confidence radii.

#pragma once

#include <Eigen/Dense>

namespace lcsw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ConfidenceEllipsoid {
  MatrixXd center;  // (n + d) x n
  MatrixXd shape;   // (n + d) x (n + d), symmetric positive definite
  double radius = 0.0;
  int dim_d = 0;
};

struct EstimatorState {
  MatrixXd V;
  MatrixXd zx_accum;
  MatrixXd prior_center;
  MatrixXd prior_shape;
  double prior_radius = 0.0;
  double lambda = 0.0;
  bool has_prior = false;  // false: flat prior lambda * I centered at zero
  double beta = 1.0;
  long count = 0;
  double prior_logdet = 0.0;  // cached log det(prior_shape)
};

// Flat prior V = lambda I, zero center.
EstimatorState init_estimator(double lambda, int n, int d);
// Inherited prior: V = prior.shape, prior center and radius retained.
EstimatorState init_estimator(const ConfidenceEllipsoid& prior);

void absorb_observation(EstimatorState& state, const VectorXd& z, const VectorXd& x_next);

struct CenterEstimate {
  MatrixXd theta;
  bool ill_conditioned = false;  // condition estimate above 1e14
};

CenterEstimate center_estimate(const EstimatorState& state);

// log det of a symmetric positive definite matrix via Cholesky.
double log_det_spd(const MatrixXd& S);

double radius_warmup(const EstimatorState& state, double delta, double theta_bound,
                     double sigma_w);
double radius_inherited(const EstimatorState& state, double delta, double sigma_w);
// Dispatches on has_prior.
double radius(const EstimatorState& state, double delta, double theta_bound, double sigma_w);

// Ellipsoid built from the current estimator state.
ConfidenceEllipsoid current_ellipsoid(const EstimatorState& state, double delta,
                                      double theta_bound, double sigma_w);

// trace((theta - center)^T shape (theta - center)).
double ellipsoid_distance(const ConfidenceEllipsoid& e, const MatrixXd& theta);
bool contains(const ConfidenceEllipsoid& e, const MatrixXd& theta);

double rbar_upper_bound(int n, int m, double delta, double sigma_w, double upsilon_bar,
                        double T, double epsilon, double lambda);
double upsilon_bar(double kappa_star, double chi, double sigma_w, int n, double T, double delta);

}  // namespace lcsw
