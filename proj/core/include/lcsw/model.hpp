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

// True switched plant, one-step dynamics, stage costs and the Riccati oracle.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcsw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// An actuating mode: a non-empty subset of the actuators, 1-based and sorted.
struct Mode {
  int id = 1;
  std::vector<int> actuators;

  int dim() const { return static_cast<int>(actuators.size()); }
  bool operator==(const Mode&) const = default;
};

// Builds a mode, sorting the actuator list. Throws std::invalid_argument on
// empty or duplicated lists; range checks happen against a system.
Mode make_mode(int id, std::vector<int> actuators);

enum class NoiseKind { kGaussian };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  double sigma_w = 1.0;
  unsigned long long seed = 0;
};

// Independent noise streams of one run. Every (seed, stream, t) triple maps to
// its own generator state, so which strategy consumes a sample (and in which
// order) never changes its value: common random numbers by construction.
enum NoiseStream : unsigned {
  kProcessNoise = 0,
  kExplorationNoise = 1,
  kInitialPerturbation = 2,
  kWarmupProcessNoise = 3,
};

// n i.i.d. draws with standard deviation `scale` (noise.sigma_w if scale < 0).
VectorXd sample_noise(const NoiseModel& noise, unsigned stream, long t, int n, double scale = -1.0);

struct LinearSwitchedSystem {
  MatrixXd A;
  MatrixXd B;
  MatrixXd Q;
  MatrixXd R;
  double sigma_w = 1.0;
  double theta_bound = 1.0;  // bound on the Frobenius norm of the true parameters
  double nu_bound = 1.0;     // bound on every mode's optimal average cost
  double alpha0 = 1.0;       // alpha0 * I <= Q, R
  std::vector<Mode> modes;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  // Looks up a mode by id; throws std::out_of_range when absent.
  const Mode& mode(int id) const;

  // Checks every invariant (shapes, definiteness, mode validity,
  // controllability). Throws std::invalid_argument naming the violation.
  void validate() const;
};

struct ModeMatrices {
  MatrixXd B_i;
  MatrixXd R_i;
};

ModeMatrices mode_submatrices(const LinearSwitchedSystem& sys, const Mode& mode);

// Stacked parameter matrix [A^T; B_i^T], (n + m_i) x n.
MatrixXd mode_theta(const LinearSwitchedSystem& sys, const Mode& mode);
MatrixXd stack_theta(const MatrixXd& A, const MatrixXd& B);

VectorXd step(const LinearSwitchedSystem& sys, const VectorXd& x, const VectorXd& u_i,
              const Mode& mode, const VectorXd& w);

double stage_cost(const LinearSwitchedSystem& sys, const VectorXd& x, const VectorXd& u_i,
                  const Mode& mode);

// Numerical rank test of [B, AB, ..., A^{n-1}B] with threshold
// 1e-9 * (largest singular value).
bool is_controllable(const MatrixXd& A, const MatrixXd& B);

double spectral_radius(const MatrixXd& M);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RiccatiResult {
  MatrixXd K;  // u = K x
  MatrixXd P;
  double J = 0.0;
  int iterations = 0;
};

// Value iteration on the discrete Riccati map started from P = Q. Stops when
// successive iterates differ by less than tol * max(1, |P|_max).
RiccatiResult riccati_oracle(const MatrixXd& theta, const MatrixXd& Q, const MatrixXd& R_i,
                             double sigma_w, double tol = 1e-13, int max_iter = 100000);

double optimal_avg_cost(const LinearSwitchedSystem& sys, const Mode& mode);

}  // namespace lcsw
