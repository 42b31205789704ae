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

#include <gtest/gtest.h>

#include "lcsw/control.hpp"

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

ConfidenceEllipsoid truth_ellipsoid(const LinearSwitchedSystem& s, double lambda, double radius) {
  const int p = s.n() + s.m();
  return ConfidenceEllipsoid{stack_theta(s.A, s.B), lambda * MatrixXd::Identity(p, p), radius, s.m()};
}

LcsaParams params(long T) {
  LcsaParams p;
  p.horizon = T;
  p.delta = 0.5 / T;
  p.lambda = 0.02;
  p.mu_scale = 1.5e-5;
  return p;
}

TEST(Stability, PlugIn) {
  const auto sp = stability_params(2.0, 1.0, 1.0);
  EXPECT_EQ(sp.kappa, 2.0);
  EXPECT_EQ(sp.gamma, 0.125);
  EXPECT_THROW(stability_params(0.1, 1.0, 1.0), std::invalid_argument);  // kappa^2 = 0.2 < 1/2
}

TEST(Madt, PlugInAndDirectEvaluation) {
  EXPECT_EQ(compute_madt(10.0, 0.05, 0.01), 56);
  const double direct = std::log(10.0) / (std::log(0.99) - std::log(0.95));
  EXPECT_EQ(compute_madt(10.0, 0.05, 0.01), static_cast<long>(std::ceil(direct)));
  EXPECT_THROW(compute_madt(10.0, 0.05, 0.03), std::invalid_argument);  // chi >= gamma / 2
  EXPECT_THROW(compute_madt(0.5, 0.05, 0.01), std::invalid_argument);
  EXPECT_THROW(compute_madt(10.0, 0.05, 0.0), std::invalid_argument);
}

WarmupConfig midsize_warmup() {
  WarmupConfig c;
  c.K0 = MatrixXd::Zero(1, 2);
  c.kappa0 = 1.0;
  c.gamma0 = 0.5;
  c.C0 = 0.01;
  c.eps0 = 1.0;
  return c;
}

TEST(Warmup, DurationMatchesLinearScan) {
  const auto c = midsize_warmup();
  const long T0 = warmup_duration(c, 2, 1, 0.1, 0.1, 0.01, 2.0, 1.0);
  const double eps2 = std::min(c.kappa0 * c.kappa0 * 1.0 * 0.01 / c.C0, c.eps0 * c.eps0);
  long scan = 1;
  while (warmup_lhs(c, 2, 0.1, 0.1, 0.01, 2.0, static_cast<double>(scan)) > eps2) ++scan;
  EXPECT_EQ(T0, scan);
}

TEST(Warmup, DurationIsMonotoneAndTrivialWhenVacuous) {
  auto c = midsize_warmup();
  const long base = warmup_duration(c, 2, 1, 0.1, 0.1, 0.01, 2.0, 1.0);
  c.eps0 = std::sqrt(0.5);  // halves eps^2
  EXPECT_GE(warmup_duration(c, 2, 1, 0.1, 0.1, 0.01, 2.0, 1.0), base);
  c.eps0 = 1e6;
  c.C0 = 1e-12;
  EXPECT_EQ(warmup_duration(c, 2, 1, 0.1, 0.1, 0.01, 2.0, 1.0), 1);
}

TEST(Warmup, ZeroStepsGivesFlatPrior) {
  const auto s = reference_system();
  WarmupConfig c;
  c.K0 = riccati_oracle(stack_theta(s.A, s.B), s.Q, s.R, s.sigma_w).K;
  c.T0 = 0;
  const auto r = run_warmup(s, c, 0.1, 1);
  const double lambda = s.sigma_w * s.sigma_w / (s.theta_bound * s.theta_bound);
  EXPECT_TRUE(r.central.shape.isApprox(lambda * MatrixXd::Identity(6, 6)));
  EXPECT_EQ(r.central.center, MatrixXd::Zero(6, 3));
  EXPECT_TRUE(r.log.steps.empty());
}

TEST(Warmup, RejectsDestabilizingGain) {
  const auto s = reference_system();
  WarmupConfig c;
  c.K0 = MatrixXd::Zero(3, 3);
  c.T0 = 10;
  EXPECT_THROW(run_warmup(s, c, 0.1, 1), std::invalid_argument);
}

TEST(Mu, PlugIn) {
  const MatrixXd V = 4.0 * MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ(compute_mu(0.0, 3.0, V), 6.0);
  EXPECT_DOUBLE_EQ(compute_mu(0.5, 3.0, V), 0.5 + 1.5 * 6.0);
  EXPECT_DOUBLE_EQ(compute_mu(0.5, 3.0, V, 0.0), 0.0);
}

TEST(ModeSelection, TiesGoToSmallestIdAndDataWins) {
  ConfidenceEllipsoid c{MatrixXd::Zero(4, 1), MatrixXd::Identity(4, 4), 1.0, 3};
  const std::vector<Mode> cands{make_mode(3, {2}), make_mode(2, {1}), make_mode(4, {3})};
  EXPECT_EQ(select_next_mode(c, cands).id, 2);
  c.shape(3, 3) = 5.0;  // data along actuator 3
  EXPECT_EQ(select_next_mode(c, cands).id, 4);
  EXPECT_EQ(select_next_mode(c, {make_mode(7, {2})}).id, 7);
}

TEST(Schedule, Validation) {
  const auto s = reference_system();
  SwitchSchedule ok{{{0, 1}, {100, 2}, {200, 1}}, {}};
  EXPECT_NO_THROW(validate_schedule(ok, s, 300, true, 100));
  EXPECT_THROW(validate_schedule(ok, s, 300, true, 101), std::invalid_argument);
  EXPECT_NO_THROW(validate_schedule(ok, s, 300, false, 101));
  EXPECT_THROW(validate_schedule(SwitchSchedule{{{5, 1}}, {}}, s, 300, false, 0), std::invalid_argument);
  EXPECT_THROW(validate_schedule(SwitchSchedule{{{0, 1}, {0, 2}}, {}}, s, 300, false, 0), std::invalid_argument);
  EXPECT_THROW(validate_schedule(SwitchSchedule{{{0, 1}, {400, 2}}, {}}, s, 300, false, 0), std::invalid_argument);
  EXPECT_THROW(validate_schedule(SwitchSchedule{{{0, 9}}, {}}, s, 300, false, 0), std::out_of_range);
  EXPECT_THROW(validate_schedule(SwitchSchedule{{{0, 1}, {10, 0}}, {}}, s, 300, false, 0), std::invalid_argument);
}

TEST(Lcsa, DeterministicForFixedSeed) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}, {300, 2}}, {}};
  const auto init = truth_ellipsoid(s, 0.02, 0.02 * 1e-8);
  const auto a = run_lcsa(s, sch, init, params(600), 4);
  const auto b = run_lcsa(s, sch, init, params(600), 4);
  ASSERT_EQ(a.steps.size(), 600u);
  for (size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].x_next, b.steps[k].x_next);
    EXPECT_EQ(a.steps[k].cost, b.steps[k].cost);
  }
  EXPECT_EQ(a.policies.size(), b.policies.size());
}

TEST(Lcsa, SingleEpochCoincidesWithNaive) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}}, {}};
  const auto init = truth_ellipsoid(s, 0.02, 0.02 * 1e-8);
  const auto a = run_lcsa(s, sch, init, params(400), 9);
  const auto b = run_naive_baseline(s, sch, init, params(400), 9);
  for (size_t k = 0; k < a.steps.size(); ++k) EXPECT_EQ(a.steps[k].x_next, b.steps[k].x_next);
}

TEST(Lcsa, NoiseIsSharedAcrossStrategies) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}, {200, 2}}, {}};
  const auto init = truth_ellipsoid(s, 0.02, 0.02 * 1e-8);
  const auto a = run_lcsa(s, sch, init, params(400), 2);
  const auto b = run_naive_baseline(s, sch, init, params(400), 2);
  for (size_t k = 0; k < a.steps.size(); ++k) EXPECT_EQ(a.steps[k].w, b.steps[k].w);
}

TEST(Lcsa, FullModeSwitchInheritsTheCentralEllipsoid) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}, {250, 1}}, {}};
  const auto log = run_lcsa(s, sch, truth_ellipsoid(s, 0.02, 2e-10), params(500), 3);
  ASSERT_EQ(log.epochs.size(), 2u);
  EXPECT_NEAR(log.epochs[1].prior_logdet, log.epochs[1].central_logdet, 1e-9);
  EXPECT_NEAR(log.epochs[0].end_logdet, log.epochs[1].prior_logdet, 1e-9);
  EXPECT_NEAR(log.epochs[1].ratio.ratio, 0.0, 1e-9);
}

TEST(Lcsa, ExactModelWithoutRelaxationIsLqr) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}}, {}};
  auto p = params(10000);
  p.mu_scale = 0.0;
  const auto log = run_lcsa(s, sch, truth_ellipsoid(s, 1e8, 0.0), p, 5);
  double sum = 0.0;
  for (const auto& st : log.steps) sum += st.cost;
  const double J = optimal_avg_cost(s, s.mode(1));
  EXPECT_NEAR(sum / 10000.0, J, 0.05 * J);
}

TEST(Lcsa, PolicyUpdatesFollowTheDoublingArithmetic) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}, {1500, 2}, {3000, 1}}, {}};
  const auto log = run_lcsa(s, sch, truth_ellipsoid(s, 0.02, 2e-10), params(4500), 8);
  for (const auto& e : log.epochs) {
    EXPECT_GE(e.updates, 1);
    EXPECT_LE(e.updates, (e.end_logdet - e.prior_logdet) / std::log(2.0) + 1.0 + 1e-9);
  }
  for (const auto& st : log.steps)
    if (st.policy_update) EXPECT_NE(st.sdp_status, "none");
  for (const auto& pol : log.policies) EXPECT_LT(pol.rho_true, 1.0);
}

TEST(Lcsa, ProjectionInheritsMoreInformationThanStandalone) {
  const auto s = reference_system();
  const SwitchSchedule sch{{{0, 1}, {1500, 2}, {3000, 1}}, {}};
  const auto lcsa = run_lcsa(s, sch, truth_ellipsoid(s, 0.02, 2e-10), params(4500), 8);
  const auto naive = run_naive_baseline(s, sch, truth_ellipsoid(s, 0.02, 2e-10), params(4500), 8);
  for (size_t k = 1; k < lcsa.epochs.size(); ++k) {
    EXPECT_GE(lcsa.epochs[k].prior_logdet, lcsa.epochs[k].standalone_logdet);
    EXPECT_GT(lcsa.epochs[k].prior_logdet, naive.epochs[k].prior_logdet);
  }
}

TEST(StateBound, PlugIns) {
  const double b = state_norm_bound(2.0, 0.5, 0.0, 100.0, 0.1, 3, 0.05);
  EXPECT_NEAR(b, 80.0 * 0.1 * std::sqrt(3 * std::log(2000.0)), 1e-12);
  EXPECT_GT(state_norm_bound(2.0, 0.5, 1.0, 10.0, 0.1, 3, 0.05),
            state_norm_bound(2.0, 0.6, 1.0, 10.0, 0.1, 3, 0.05));
  const MadtParams m{2.0, 0.25, 0.05, 0};
  EXPECT_NEAR(switched_state_bound(m, 1.0, 10.0, 0.1, 3, 100.0, 0.1),
              std::exp(-0.5) + (40.0 / 0.0125) * 0.1 * std::sqrt(3 * std::log(1000.0)), 1e-9);
}

}  // namespace
}  // namespace lcsw
