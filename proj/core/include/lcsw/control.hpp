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

// Warm-up exploration and the learn-and-control-while-switching loop.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsw/ellipsoid.hpp"
#include "lcsw/estimation.hpp"
#include "lcsw/model.hpp"
#include "lcsw/sdp.hpp"
#include "lcsw/trajectory.hpp"

namespace lcsw {

struct StabilityParams {
  double kappa = 1.0;
  double gamma = 0.5;
};

StabilityParams stability_params(double nu, double alpha0, double sigma_w);

struct MadtParams {
  double kappa_star = 1.0;
  double gamma_star = 0.5;
  double chi = 0.1;
  long tau_mad = 1;
};

long compute_madt(double kappa_star, double gamma_star, double chi);

struct WarmupConfig {
  MatrixXd K0;
  double kappa0 = 1.0;
  double gamma0 = 0.5;
  double C0 = 1.0;
  double eps0 = 1.0;
  std::optional<long> T0;
};

long warmup_duration(const WarmupConfig& cfg, int n, int m, double delta, double sigma_w,
                     double lambda, double theta_bound, double alpha0);

// Left-hand side of the warm-up inequality at T0 (exposed for tests).
double warmup_lhs(const WarmupConfig& cfg, int n, double delta, double sigma_w, double lambda,
                  double theta_bound, double T0);

class RunAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WarmupResult {
  EstimatorState estimator;
  ConfidenceEllipsoid central;
  TrajectoryLog log;
  long T0 = 0;
};

// Plays u = K0 x + eta on mode 1 with lambda = sigma^2 / theta_bound^2.
WarmupResult run_warmup(const LinearSwitchedSystem& sys, const WarmupConfig& cfg, double delta,
                        unsigned long long seed);

// r + (1 + r) theta_bound ||V||^{1/2}, times `scale`.
double compute_mu(double r, double theta_bound, const MatrixXd& V, double scale = 1.0);

// argmax of the projected log-det; ties go to the smallest mode id.
const Mode& select_next_mode(const ConfidenceEllipsoid& central, const std::vector<Mode>& candidates);

struct SwitchEvent {
  long time = 0;
  int mode_id = 1;  // 0: choose with select_next_mode among `candidates`
  bool operator==(const SwitchEvent&) const = default;
};

struct SwitchSchedule {
  std::vector<SwitchEvent> events;
  std::vector<int> candidates;
  bool operator==(const SwitchSchedule&) const = default;
};

// Throws std::invalid_argument on an invalid schedule; when madt_enforce is
// set, also on any gap below tau_mad.
void validate_schedule(const SwitchSchedule& schedule, const LinearSwitchedSystem& sys,
                       long horizon, bool madt_enforce, long tau_mad);

struct LcsaParams {
  long horizon = 0;
  double delta = 0.1;
  double lambda = 1.0;
  double mu_scale = 1.0;
  double sdp_tol = 1e-7;
  double logdet_slack = 1e-12;
  double state_abort = 1e6;
  double upsilon_bar = 0.0;  // enters the projection log-det diagnostic only
  VectorXd x0;  // empty: zero initial state
};

enum class Strategy { kLcsa, kNaive };
std::string to_string(Strategy s);

// `initial` is the central ellipsoid (Theta0, lambda I, r0).
TrajectoryLog run_lcsa(const LinearSwitchedSystem& sys, const SwitchSchedule& schedule,
                       const ConfidenceEllipsoid& initial, const LcsaParams& params,
                       unsigned long long seed);

// Restarts from (Theta0 rows, lambda I, r0) at every switch; same noise stream.
TrajectoryLog run_naive_baseline(const LinearSwitchedSystem& sys, const SwitchSchedule& schedule,
                                 const ConfidenceEllipsoid& initial, const LcsaParams& params,
                                 unsigned long long seed);

// kappa e^{-gamma (t_rel - 1) / 2} |x| + (20 kappa / gamma) sigma sqrt(n log(t_rel / delta)).
double state_norm_bound(double kappa, double gamma, double x0_norm, double t_rel, double sigma_w,
                        int n, double delta);

// e^{-chi t} |x0| + U_Omega with U_Omega = (20 kappa* / (chi gamma*)) sigma sqrt(n log(T / delta)).
double switched_state_bound(const MadtParams& madt, double x0_norm, double t, double sigma_w, int n,
                            double T, double delta);

}  // namespace lcsw
