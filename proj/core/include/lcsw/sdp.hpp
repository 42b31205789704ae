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

// Exact and uncertainty-relaxed LQR semidefinite programs, solved with a
// small dense primal-dual interior point method.

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcsw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class SdpStatus { kOptimal, kInfeasible, kNonConvergence };
std::string to_string(SdpStatus s);

// Block-diagonal symmetric matrix.
using BlockMatrix = std::vector<MatrixXd>;

// min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0 (block-wise PSD).
// Dual:  max b^T y  s.t.  C - sum_i y_i A_i = Z >= 0.
struct ConicProblem {
  std::vector<int> blocks;
  BlockMatrix C;
  std::vector<BlockMatrix> A;
  VectorXd b;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 500;
};

struct ConicSolution {
  BlockMatrix X;
  BlockMatrix Z;
  VectorXd y;
  SdpStatus status = SdpStatus::kNonConvergence;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;  // relative
  double dual_infeasibility = 0.0;    // relative
  double relative_gap = 0.0;
};

// Infeasible-start path-following method (HKM direction, Mehrotra
// predictor-corrector). Never throws on numerical trouble: reports a status.
ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& opts = {});

struct SdpProblem {
  MatrixXd Q;
  MatrixXd R;      // R_i of the active mode
  MatrixXd theta;  // (n + m_i) x n estimate
  MatrixXd V;      // shape matrix of the confidence set
  MatrixXd W;      // noise covariance
  double mu = 0.0;
};

struct SdpSolution {
  int n = 0;
  MatrixXd Sigma;
  double objective = 0.0;
  double residual = 0.0;
  std::optional<MatrixXd> dual_P;
  SdpStatus status = SdpStatus::kNonConvergence;
  int iterations = 0;
};

class SdpError : public std::runtime_error {
 public:
  SdpError(const std::string& what, SdpStatus status, double mu, double cond_v)
      : std::runtime_error(what), status_(status), mu_(mu), cond_v_(cond_v) {}
  SdpStatus status() const { return status_; }
  double mu() const { return mu_; }
  double cond_v() const { return cond_v_; }

 private:
  SdpStatus status_;
  double mu_;
  double cond_v_;
};

// Sigma_xx = Theta^T Sigma Theta + W.
SdpSolution solve_exact_sdp(const MatrixXd& theta, const MatrixXd& Q, const MatrixXd& R_i,
                            const MatrixXd& W, double tol = 1e-7);

// Sigma_xx >= Theta^T Sigma Theta + W - mu (Sigma . V^{-1}) I.
SdpSolution solve_relaxed_sdp(const SdpProblem& problem, double tol = 1e-7);

// K = Sigma_ux Sigma_xx^{-1}.
MatrixXd extract_gain(const SdpSolution& solution);

// Independent solve of the dual program
//   max P . W  s.t.  diag(Q - P, R) + Theta P Theta^T >= mu tr(P) V^{-1},  P >= 0.
MatrixXd solve_relaxed_dual(const SdpProblem& problem, double tol = 1e-7);

// Plain-text dump: a header line "sdp n m_i", the scalar mu, then each matrix
// as "name rows cols" followed by row-major values.
void write_sdp_instance(std::ostream& os, const SdpProblem& problem);

}  // namespace lcsw
