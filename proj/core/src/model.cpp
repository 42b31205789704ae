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

#include "lcsw/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace lcsw {

VectorXd sample_noise(const NoiseModel& noise, unsigned stream, long t, int n, double scale) {
  const double sd = scale < 0.0 ? noise.sigma_w : scale;
  std::seed_seq seq{static_cast<unsigned>(noise.seed & 0xffffffffULL),
                    static_cast<unsigned>(noise.seed >> 32), stream,
                    static_cast<unsigned>(static_cast<unsigned long long>(t) & 0xffffffffULL),
                    static_cast<unsigned>(static_cast<unsigned long long>(t) >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = sd * nd(gen);
  return out;
}

Mode make_mode(int id, std::vector<int> actuators) {
  if (actuators.empty()) throw std::invalid_argument("mode " + std::to_string(id) + ": no actuators");
  std::sort(actuators.begin(), actuators.end());
  if (actuators.front() < 1)
    throw std::invalid_argument("mode " + std::to_string(id) + ": actuator indices are 1-based");
  if (std::adjacent_find(actuators.begin(), actuators.end()) != actuators.end())
    throw std::invalid_argument("mode " + std::to_string(id) + ": duplicated actuator index");
  return Mode{id, std::move(actuators)};
}

const Mode& LinearSwitchedSystem::mode(int id) const {
  for (const auto& md : modes)
    if (md.id == id) return md;
  throw std::out_of_range("unknown mode id " + std::to_string(id));
}

namespace {

double min_eig(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void check_mode_range(const Mode& mode, int m) {
  if (mode.actuators.empty()) throw std::invalid_argument("mode has no actuators");
  for (int a : mode.actuators)
    if (a < 1 || a > m)
      throw std::invalid_argument("mode " + std::to_string(mode.id) + ": actuator index " +
                                  std::to_string(a) + " outside 1.." + std::to_string(m));
}

}  // namespace

void LinearSwitchedSystem::validate() const {
  const int nn = n(), mm = m();
  if (nn == 0 || A.cols() != nn) throw std::invalid_argument("A must be square and non-empty");
  if (B.rows() != nn || mm == 0) throw std::invalid_argument("B must have n rows");
  if (Q.rows() != nn || Q.cols() != nn) throw std::invalid_argument("Q must be n x n");
  if (R.rows() != mm || R.cols() != mm) throw std::invalid_argument("R must be m x m");
  if ((Q - Q.transpose()).norm() > 1e-12 * (1.0 + Q.norm()))
    throw std::invalid_argument("Q must be symmetric");
  if ((R - R.transpose()).norm() > 1e-12 * (1.0 + R.norm()))
    throw std::invalid_argument("R must be symmetric");
  if (min_eig(Q) <= 0.0) throw std::invalid_argument("Q must be positive definite");
  if (min_eig(R) < 0.0) throw std::invalid_argument("R must be positive semidefinite");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("sigma_w must be positive");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (min_eig(Q) < alpha0 * (1.0 - 1e-12))
    throw std::invalid_argument("alpha0 * I <= Q violated");
  if (!(theta_bound > 0.0)) throw std::invalid_argument("theta_bound must be positive");
  if (!(nu_bound > 0.0)) throw std::invalid_argument("nu_bound must be positive");
  if (modes.empty()) throw std::invalid_argument("at least one mode required");
  std::set<int> ids;
  for (const auto& md : modes) {
    check_mode_range(md, mm);
    if (!ids.insert(md.id).second)
      throw std::invalid_argument("duplicated mode id " + std::to_string(md.id));
    if (!is_controllable(A, mode_submatrices(*this, md).B_i))
      throw std::invalid_argument("mode " + std::to_string(md.id) + " is not controllable");
  }
  const Mode* first = nullptr;
  for (const auto& md : modes)
    if (md.id == 1) first = &md;
  if (first == nullptr || first->dim() != mm)
    throw std::invalid_argument("mode 1 must contain all actuators");
}

ModeMatrices mode_submatrices(const LinearSwitchedSystem& sys, const Mode& mode) {
  check_mode_range(mode, sys.m());
  const int mi = mode.dim();
  ModeMatrices out{MatrixXd(sys.n(), mi), MatrixXd(mi, mi)};
  for (int j = 0; j < mi; ++j) {
    out.B_i.col(j) = sys.B.col(mode.actuators[j] - 1);
    for (int k = 0; k < mi; ++k)
      out.R_i(j, k) = sys.R(mode.actuators[j] - 1, mode.actuators[k] - 1);
  }
  return out;
}

MatrixXd stack_theta(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd theta(A.rows() + B.cols(), A.rows());
  theta << A.transpose(), B.transpose();
  return theta;
}

MatrixXd mode_theta(const LinearSwitchedSystem& sys, const Mode& mode) {
  return stack_theta(sys.A, mode_submatrices(sys, mode).B_i);
}

VectorXd step(const LinearSwitchedSystem& sys, const VectorXd& x, const VectorXd& u_i,
              const Mode& mode, const VectorXd& w) {
  if (x.size() != sys.n() || w.size() != sys.n() || u_i.size() != mode.dim())
    throw std::invalid_argument("step: dimension mismatch");
  VectorXd out = sys.A * x + w;
  for (int j = 0; j < mode.dim(); ++j) out += sys.B.col(mode.actuators[j] - 1) * u_i(j);
  return out;
}

double stage_cost(const LinearSwitchedSystem& sys, const VectorXd& x, const VectorXd& u_i,
                  const Mode& mode) {
  if (x.size() != sys.n() || u_i.size() != mode.dim())
    throw std::invalid_argument("stage_cost: dimension mismatch");
  const MatrixXd R_i = mode_submatrices(sys, mode).R_i;
  return x.dot(sys.Q * x) + u_i.dot(R_i * u_i);
}

bool is_controllable(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  MatrixXd C(n, n * m);
  MatrixXd blk = B;
  for (int k = 0; k < n; ++k) {
    C.middleCols(k * m, m) = blk;
    blk = A * blk;
  }
  Eigen::JacobiSVD<MatrixXd> svd(C);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return false;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * s(0)) ++rank;
  return rank == n;
}

double spectral_radius(const MatrixXd& M) {
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RiccatiResult riccati_oracle(const MatrixXd& theta, const MatrixXd& Q, const MatrixXd& R_i,
                             double sigma_w, double tol, int max_iter) {
  const int n = static_cast<int>(theta.cols());
  const int mi = static_cast<int>(theta.rows()) - n;
  if (mi < 0 || Q.rows() != n || R_i.rows() != mi)
    throw std::invalid_argument("riccati_oracle: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("riccati_oracle: tol must be positive");
  const MatrixXd A = theta.topRows(n).transpose();
  const MatrixXd B = theta.bottomRows(mi).transpose();

  MatrixXd P = Q;
  RiccatiResult res;
  for (int it = 1; it <= max_iter; ++it) {
    const MatrixXd K = -(R_i + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
    const MatrixXd Acl = A + B * K;
    // Closed-loop (Joseph) form: far less cancellation than the textbook
    // update when A is strongly unstable.
    MatrixXd next = Q + K.transpose() * R_i * K + Acl.transpose() * P * Acl;
    next = 0.5 * (next + next.transpose());
    const double gap = (next - P).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    P = std::move(next);
    if (!std::isfinite(gap)) break;
    if (gap < tol * scale) {
      res.iterations = it;
      res.P = P;
      res.K = -(R_i + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
      res.J = sigma_w * sigma_w * P.trace();
      if (mi > 0 && spectral_radius(A + B * res.K) >= 1.0)
        throw DivergenceError("riccati_oracle: fixed point is not stabilizing");
      return res;
    }
  }
  throw DivergenceError("riccati_oracle: no convergence within max_iter");
}

double optimal_avg_cost(const LinearSwitchedSystem& sys, const Mode& mode) {
  const auto mm = mode_submatrices(sys, mode);
  return riccati_oracle(mode_theta(sys, mode), sys.Q, mm.R_i, sys.sigma_w).J;
}

}  // namespace lcsw
