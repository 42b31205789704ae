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

// Regret accounting, the four-term decomposition and the closed-form bounds.

#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "lcsw/model.hpp"
#include "lcsw/trajectory.hpp"

namespace lcsw {

class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegretReport {
  std::map<int, double> jstar;
  std::vector<double> instantaneous;
  std::vector<double> cumulative;  // exact prefix sums of `instantaneous`
};

// Per-step cost minus J* of the active mode.
RegretReport regret_curve(const TrajectoryLog& log, const std::map<int, double>& jstar_by_mode);

std::map<int, double> jstar_by_mode(const LinearSwitchedSystem& sys);

struct GoodEventParams {
  double kappa_star = 1.0;
  double gamma_star = 0.5;
  double chi = 0.1;
  double upsilon_bar = 0.0;
};

struct GoodEvent {
  std::vector<bool> holds;
  long violations = 0;
  long set_violations = 0;    // true parameters outside the epoch ellipsoid
  long state_violations = 0;  // extended state above the geometric envelope
};

GoodEvent good_event_check(const TrajectoryLog& log, const GoodEventParams& params);

// Cumulative curves of the four decomposition terms, restricted to the good
// event. Noise is reconstructed from the logged states and inputs.
struct Decomposition {
  std::vector<double> r1, r2, r3, r4, r4_lemma;  // r4: 4 nu / sigma^2, r4_lemma: 8 nu / sigma^2
  std::vector<double> realized;                  // cumulative regret on good-event steps
  double max_noise_error = 0.0;                  // |reconstructed w - injected w|_inf
};

Decomposition decompose_regret(const TrajectoryLog& log, const LinearSwitchedSystem& sys,
                               const std::map<int, double>& jstar, const std::vector<bool>& good);

struct BoundInputs {
  int n = 1;
  int m = 1;
  int ns = 1;
  double T = 1.0;
  double delta = 0.1;
  double sigma_w = 1.0;
  double theta_bound = 1.0;
  double nu_bar = 1.0;
  double kappa_star = 1.0;
  double gamma_star = 0.5;
  double chi = 0.1;
  double epsilon = 0.0;
  double lambda = 1.0;
  double x0_norm = 0.0;
};

struct BoundTerms {
  double upsilon_bar = 0.0;
  double rbar = 0.0;
  double n_ts = 0.0;       // bound on the number of policy updates
  double x_bound = 0.0;    // bound on max |x_t|
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
  double total = 0.0;
};

BoundTerms theoretical_bound(const BoundInputs& in);

// lambda = 4 nu mu_bar / (alpha0 sigma^2) with mu_bar = rbar + (1 + rbar) theta_bound
// sqrt((1 + 2 upsilon_bar) T).
double default_lambda(const BoundInputs& in, double alpha0, double* mu_bar = nullptr);

}  // namespace lcsw
