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

// Per-step and per-policy records of one closed-loop run.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcsw/ellipsoid.hpp"
#include "lcsw/sdp.hpp"

namespace lcsw {

struct StepRecord {
  long t = 0;
  int mode_id = 1;
  int epoch = 0;
  VectorXd x;        // x_t
  VectorXd u;        // mode input u^i_t
  VectorXd x_next;   // x_{t+1}
  VectorXd w;        // injected noise
  double cost = 0.0;
  int policy_id = -1;          // index into TrajectoryLog::policies
  bool policy_update = false;
  double logdet_v = 0.0;       // log det of the epoch shape matrix at t
  double mu = 0.0;             // mu of the active policy
  std::string sdp_status = "none";
  double radius = 0.0;         // epoch radius at t
  bool theta_in_set = true;    // true parameters inside the epoch ellipsoid at t
  double z_vinv_z = 0.0;       // z_t^T V_t^{-1} z_t
};

struct PolicyRecord {
  long t = 0;
  int epoch = 0;
  int mode_id = 1;
  MatrixXd K;
  MatrixXd P;                  // dual matrix of the relaxed program
  double mu = 0.0;
  double radius = 0.0;
  double objective = 0.0;
  double rho_true = 0.0;       // spectral radius of A* + B*_i K
  std::string status = "optimal";
  bool fallback = false;
};

struct EpochRecord {
  int epoch = 0;
  int mode_id = 1;
  long start = 0;
  long end = 0;
  double prior_logdet = 0.0;        // log det of the inherited shape
  double standalone_logdet = 0.0;   // log det(lambda I + mode-only data) at the switch
  double central_logdet = 0.0;
  LogdetRatio ratio;                // central vs projected
  double end_logdet = 0.0;
  int updates = 0;
};

struct RunMetadata {
  unsigned long long seed = 0;
  std::string strategy;
  double lambda = 0.0;
  double mu_scale = 1.0;
  double r0 = 0.0;
  std::string r0_rule;
  double mu_bar = 0.0;
  double upsilon_bar = 0.0;
  long tau_mad = 0;
  std::string config_hash;
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
  std::vector<PolicyRecord> policies;
  std::vector<EpochRecord> epochs;
  RunMetadata meta;
};

}  // namespace lcsw
