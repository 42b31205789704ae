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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lcsw/model.hpp"

namespace lcsw {
namespace {

LinearSwitchedSystem reference_system() {
  LinearSwitchedSystem s;
  s.A.resize(3, 3);
  s.A << 10.4, 0.0, -2.7, 5.2, -8.1, 8.3, 0.0, 0.4, -9.0;
  s.B.resize(3, 3);
  s.B << -4.7, 6.1, -2.9, -5.0, 5.8, 2.5, 2.9, 0.0, -7.2;
  s.Q.resize(3, 3);
  s.Q << 6.5, -0.8, -1.4, -0.8, 5.7, 2.6, -1.4, 2.6, 25.0;
  s.R.resize(3, 3);
  s.R << 40, 10, 16, 10, 28, 8, 16, 8, 48;
  s.sigma_w = 0.003;
  s.theta_bound = 25.0;
  s.nu_bound = 0.8;
  s.alpha0 = 5.07;
  s.modes = {make_mode(1, {1, 2, 3}), make_mode(2, {1, 2})};
  return s;
}

TEST(Mode, SortsAndRejectsInvalidActuators) {
  EXPECT_EQ(make_mode(3, {3, 1}).actuators, (std::vector<int>{1, 3}));
  EXPECT_THROW(make_mode(1, {}), std::invalid_argument);
  EXPECT_THROW(make_mode(1, {0}), std::invalid_argument);
  EXPECT_THROW(make_mode(1, {2, 2}), std::invalid_argument);
}

TEST(System, ReferenceSystemValidates) {
  const auto s = reference_system();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.mode(2).dim(), 2);
  EXPECT_THROW(s.mode(7), std::out_of_range);
}

TEST(System, ValidationNamesTheViolation) {
  auto s = reference_system();
  s.Q(0, 0) = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = reference_system();
  s.alpha0 = 6.0;  // above the smallest eigenvalue of Q
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = reference_system();
  s.modes.push_back(make_mode(3, {4}));
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(System, ModeSubmatricesSelectColumns) {
  const auto s = reference_system();
  const auto mm = mode_submatrices(s, s.mode(2));
  ASSERT_EQ(mm.B_i.cols(), 2);
  EXPECT_EQ(mm.B_i.col(1), s.B.col(1));
  EXPECT_DOUBLE_EQ(mm.R_i(0, 1), 10.0);
  const MatrixXd th = mode_theta(s, s.mode(2));
  EXPECT_EQ(th.rows(), 5);
  EXPECT_EQ(th.topRows(3), s.A.transpose());
  EXPECT_EQ(th.row(4), s.B.col(1).transpose());
}

TEST(System, StepAndCost) {
  const auto s = reference_system();
  const VectorXd x = VectorXd::Ones(3), u = VectorXd::Constant(2, 0.5), w = VectorXd::Zero(3);
  const auto mm = mode_submatrices(s, s.mode(2));
  EXPECT_TRUE(step(s, x, u, s.mode(2), w).isApprox(s.A * x + mm.B_i * u));
  EXPECT_NEAR(stage_cost(s, x, u, s.mode(2)), x.dot(s.Q * x) + u.dot(mm.R_i * u), 1e-12);
}

TEST(System, CostLowerBoundOnRandomSamples) {
  const auto s = reference_system();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    VectorXd x(3), u(3);
    for (int i = 0; i < 3; ++i) x(i) = nd(rng), u(i) = nd(rng);
    EXPECT_GE(stage_cost(s, x, u, s.mode(1)), s.alpha0 * (x.squaredNorm() + u.squaredNorm()));
  }
}

TEST(Noise, CommonRandomNumbersAreIndexedBySeedStreamAndTime) {
  const NoiseModel nm{NoiseKind::kGaussian, 0.5, 11};
  const VectorXd a = sample_noise(nm, kProcessNoise, 42, 3);
  EXPECT_EQ(a, sample_noise(nm, kProcessNoise, 42, 3));
  EXPECT_NE(a, sample_noise(nm, kProcessNoise, 43, 3));
  EXPECT_NE(a, sample_noise(nm, kExplorationNoise, 42, 3));
  const NoiseModel other{NoiseKind::kGaussian, 0.5, 12};
  EXPECT_NE(a, sample_noise(other, kProcessNoise, 42, 3));
}

TEST(Noise, ScaleMatchesSigma) {
  const NoiseModel nm{NoiseKind::kGaussian, 0.3, 5};
  double ss = 0.0;
  const int N = 20000;
  for (int t = 0; t < N; ++t) ss += sample_noise(nm, kProcessNoise, t, 1)(0) * sample_noise(nm, kProcessNoise, t, 1)(0);
  EXPECT_NEAR(std::sqrt(ss / N), 0.3, 0.01);
}

TEST(Controllability, RankTest) {
  MatrixXd A(2, 2), B(2, 1);
  A << 1.1, 0.0, 0.0, 0.9;
  B << 1.0, 0.0;
  EXPECT_FALSE(is_controllable(A, B));
  B << 1.0, 1.0;
  EXPECT_TRUE(is_controllable(A, B));
}

TEST(Riccati, ScalarClosedForm) {
  // For a = 0.5 and b = q = r = 1 the scalar equation reduces to p^2 - p/4 - 1 = 0.
  const double a = 0.5, b = 1.0;
  MatrixXd theta(2, 1);
  theta << a, b;
  const auto res = riccati_oracle(theta, MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1), 1.0);
  const double p = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;
  EXPECT_NEAR(res.P(0, 0), p, 1e-10);
  EXPECT_NEAR(res.K(0, 0), -a * b * p / (1.0 + b * b * p), 1e-10);
  EXPECT_NEAR(res.J, p, 1e-10);
}

TEST(Riccati, ReferenceSystemSatisfiesTheAlgebraicEquation) {
  const auto s = reference_system();
  for (const auto& md : s.modes) {
    const auto mm = mode_submatrices(s, md);
    const auto res = riccati_oracle(mode_theta(s, md), s.Q, mm.R_i, s.sigma_w);
    const MatrixXd& P = res.P;
    const MatrixXd G = mm.R_i + mm.B_i.transpose() * P * mm.B_i;
    const MatrixXd rhs = s.Q + s.A.transpose() * P * s.A -
                         s.A.transpose() * P * mm.B_i * G.ldlt().solve(mm.B_i.transpose() * P * s.A);
    EXPECT_LT((rhs - P).cwiseAbs().maxCoeff(), 1e-9 * P.cwiseAbs().maxCoeff());
    EXPECT_LT(spectral_radius(s.A + mm.B_i * res.K), 1.0);
    EXPECT_NEAR(res.J, s.sigma_w * s.sigma_w * P.trace(), 1e-15);
    EXPECT_NEAR(optimal_avg_cost(s, md), res.J, 1e-15);
  }
}

TEST(Riccati, UnstabilizablePairDiverges) {
  MatrixXd theta(3, 2);
  theta << 2.0, 0.0, 0.0, 0.5, 0.0, 1.0;  // A = diag(2, 0.5), B = e2: unstable mode unreachable
  EXPECT_THROW(riccati_oracle(theta, MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1), 1.0, 1e-13, 2000),
               DivergenceError);
}

}  // namespace
}  // namespace lcsw
