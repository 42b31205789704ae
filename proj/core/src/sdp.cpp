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

#include "lcsw/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace lcsw {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kNonConvergence: return "non_convergence";
  }
  return "unknown";
}

namespace {

double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double fro(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Largest alpha in (0, inf] with X + alpha dX PSD, per block.
double max_step(const BlockMatrix& X, const BlockMatrix& dX) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < X.size(); ++k) {
    Eigen::LLT<MatrixXd> llt(X[k]);
    const MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(X[k].rows(), X[k].cols()));
    const MatrixXd S = sym(Linv * dX[k] * Linv.transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly)
                            .eigenvalues()(0);
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

struct Direction {
  BlockMatrix dX, dZ;
  VectorXd dy;
};

// Rank-revealing polish of an optimal primal iterate: restrict X to the null
// space of the (accurate) dual slack and re-solve the equality constraints.
// The IPM primal iterate is only O(sqrt(gap)) accurate along the optimal
// face, while this projection inherits the dual accuracy.
bool polish_primal(const ConicProblem& pr, ConicSolution& sol, double tol) {
  const size_t nb = pr.blocks.size();
  std::vector<MatrixXd> N(nb);
  int unknowns = 0;
  for (size_t k = 0; k < nb; ++k) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(sol.X[k]);
    const VectorXd& lx = ex.eigenvalues();
    const double top = std::max(lx.maxCoeff(), 1e-300);
    int r = 0;
    for (int i = 0; i < lx.size(); ++i)
      if (lx(i) > 1e-6 * top) ++r;
    Eigen::SelfAdjointEigenSolver<MatrixXd> ez(sol.Z[k]);
    const VectorXd& lz = ez.eigenvalues();
    // Require a clear separation between the null and range parts of Z.
    if (r > 0 && r < lz.size() && std::abs(lz(r - 1)) > 1e-3 * lz(r)) return false;
    N[k] = ez.eigenvectors().leftCols(r);
    unknowns += r * (r + 1) / 2;
  }
  if (unknowns == 0) return false;
  const int mc = static_cast<int>(pr.b.size());
  MatrixXd G(mc, unknowns);
  std::vector<std::pair<size_t, std::pair<int, int>>> idx;
  int col = 0;
  for (size_t k = 0; k < nb; ++k) {
    const int r = static_cast<int>(N[k].cols());
    for (int p = 0; p < r; ++p)
      for (int q = p; q < r; ++q, ++col) {
        MatrixXd Bpq = N[k].col(p) * N[k].col(q).transpose();
        if (p != q) Bpq += Bpq.transpose().eval();
        for (int i = 0; i < mc; ++i) G(i, col) = pr.A[i][k].cwiseProduct(Bpq).sum();
        idx.push_back({k, {p, q}});
      }
  }
  const VectorXd yv = G.colPivHouseholderQr().solve(pr.b);
  BlockMatrix Xp(nb);
  col = 0;
  for (size_t k = 0; k < nb; ++k) {
    const int r = static_cast<int>(N[k].cols());
    MatrixXd Y = MatrixXd::Zero(r, r);
    for (int p = 0; p < r; ++p)
      for (int q = p; q < r; ++q, ++col) Y(p, q) = Y(q, p) = yv(col);
    if (r > 0) {
      const double ly = Eigen::SelfAdjointEigenSolver<MatrixXd>(Y, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (ly < 0.0) return false;
    }
    Xp[k] = sym(N[k] * Y * N[k].transpose());
  }
  VectorXd res = pr.b;
  for (int i = 0; i < mc; ++i) res(i) -= inner(pr.A[i], Xp);
  const double pinf = res.norm() / (1.0 + pr.b.norm());
  const double pobj = inner(pr.C, Xp);
  const double gap = std::abs(pobj - sol.dual_objective) /
                     (1.0 + std::abs(pobj) + std::abs(sol.dual_objective));
  if (pinf > std::max(sol.primal_infeasibility, tol) || gap > std::max(sol.relative_gap, tol))
    return false;
  sol.X = std::move(Xp);
  sol.primal_objective = pobj;
  sol.primal_infeasibility = pinf;
  sol.relative_gap = gap;
  return true;
}

}  // namespace

ConicSolution solve_conic(const ConicProblem& original, const SolverOptions& opts) {
  const size_t nb = original.blocks.size();
  const int mc = static_cast<int>(original.b.size());
  if (original.C.size() != nb || static_cast<int>(original.A.size()) != mc)
    throw std::invalid_argument("solve_conic: inconsistent problem data");
  // Row equilibration: every constraint matrix scaled to unit Frobenius norm.
  ConicProblem pr = original;
  VectorXd row_scale = VectorXd::Ones(mc);
  for (int i = 0; i < mc; ++i) {
    const double na = fro(pr.A[i]);
    if (na > 0.0) {
      row_scale(i) = 1.0 / na;
      for (auto& blk : pr.A[i]) blk *= row_scale(i);
      pr.b(i) *= row_scale(i);
    }
  }
  auto unscale = [&](ConicSolution& s) {
    s.y = s.y.cwiseProduct(row_scale);
    return s;
  };
  int N = 0;
  for (int s : pr.blocks) N += s;

  auto Aop = [&](const BlockMatrix& X) {
    VectorXd v(mc);
    for (int i = 0; i < mc; ++i) v(i) = inner(pr.A[i], X);
    return v;
  };
  auto Aadj = [&](const VectorXd& y) {
    BlockMatrix out(nb);
    for (size_t k = 0; k < nb; ++k) out[k] = MatrixXd::Zero(pr.blocks[k], pr.blocks[k]);
    for (int i = 0; i < mc; ++i)
      for (size_t k = 0; k < nb; ++k) out[k] += y(i) * pr.A[i][k];
    return out;
  };

  double max_a = 0.0, max_ab = 0.0;
  for (int i = 0; i < mc; ++i) {
    const double na = fro(pr.A[i]);
    max_a = std::max(max_a, na);
    max_ab = std::max(max_ab, N * (1.0 + std::abs(pr.b(i))) / (1.0 + na));
  }
  const double sqN = std::sqrt(static_cast<double>(N));
  const double xi = std::max({10.0, sqN, max_ab});
  const double eta = std::max({10.0, sqN, max_a, fro(pr.C)});

  ConicSolution sol;
  sol.X.resize(nb);
  sol.Z.resize(nb);
  for (size_t k = 0; k < nb; ++k) {
    sol.X[k] = xi * MatrixXd::Identity(pr.blocks[k], pr.blocks[k]);
    sol.Z[k] = eta * MatrixXd::Identity(pr.blocks[k], pr.blocks[k]);
  }
  sol.y = VectorXd::Zero(mc);
  const double nb_norm = 1.0 + pr.b.norm();
  const double nc_norm = 1.0 + fro(pr.C);

  auto& X = sol.X;
  auto& Z = sol.Z;
  auto& y = sol.y;
  for (int it = 0; it <= opts.max_iter; ++it) {
    sol.iterations = it;
    const VectorXd rp = pr.b - Aop(X);
    BlockMatrix Rd = Aadj(y);
    for (size_t k = 0; k < nb; ++k) Rd[k] = pr.C[k] - Z[k] - Rd[k];
    const double mu = inner(X, Z) / N;
    sol.primal_objective = inner(pr.C, X);
    sol.dual_objective = pr.b.dot(y);
    sol.primal_infeasibility = rp.norm() / nb_norm;
    sol.dual_infeasibility = fro(Rd) / nc_norm;
    sol.relative_gap = std::abs(sol.primal_objective - sol.dual_objective) /
                       (1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
    if (!std::isfinite(sol.relative_gap) || !std::isfinite(mu)) {
      sol.status = SdpStatus::kNonConvergence;
      return unscale(sol);
    }
    if (sol.primal_infeasibility < opts.tol && sol.dual_infeasibility < opts.tol &&
        sol.relative_gap < opts.tol) {
      sol.status = SdpStatus::kOptimal;
      polish_primal(pr, sol, opts.tol);
      return unscale(sol);
    }
    // Divergence of either iterate signals an infeasible (or unbounded) program.
    if (fro(X) > 1e12 * (1.0 + xi) || y.norm() > 1e12 * (1.0 + eta)) {
      sol.status = SdpStatus::kInfeasible;
      return unscale(sol);
    }
    if (it == opts.max_iter) break;

    BlockMatrix Zinv(nb);
    for (size_t k = 0; k < nb; ++k) {
      Eigen::LLT<MatrixXd> llt(Z[k]);
      if (llt.info() != Eigen::Success) {
        sol.status = SdpStatus::kNonConvergence;
        return unscale(sol);
      }
      Zinv[k] = sym(llt.solve(MatrixXd::Identity(pr.blocks[k], pr.blocks[k])));
    }
    // Schur complement M_ij = <A_i, X A_j Z^{-1}>.
    MatrixXd M(mc, mc);
    std::vector<BlockMatrix> G(mc, BlockMatrix(nb));
    for (int j = 0; j < mc; ++j)
      for (size_t k = 0; k < nb; ++k) G[j][k] = X[k] * pr.A[j][k] * Zinv[k];
    for (int i = 0; i < mc; ++i)
      for (int j = i; j < mc; ++j) M(i, j) = M(j, i) = 0.5 * (inner(pr.A[i], G[j]) + inner(pr.A[j], G[i]));
    Eigen::LLT<MatrixXd> Mchol(M);
    Eigen::LDLT<MatrixXd> Mldlt;
    const bool use_llt = Mchol.info() == Eigen::Success;
    if (!use_llt) Mldlt.compute(M);

    BlockMatrix XRdZ(nb);
    for (size_t k = 0; k < nb; ++k) XRdZ[k] = X[k] * Rd[k] * Zinv[k];
    const VectorXd base_rhs = pr.b + Aop(XRdZ);
    const VectorXd AZinv = Aop(Zinv);

    auto direction = [&](double target, const BlockMatrix* corr) {
      Direction d;
      VectorXd rhs = base_rhs - target * AZinv;
      BlockMatrix C2;
      if (corr != nullptr) {
        C2 = *corr;
        rhs += Aop(C2);
      }
      d.dy = use_llt ? VectorXd(Mchol.solve(rhs)) : VectorXd(Mldlt.solve(rhs));
      for (int refine = 0; refine < 2; ++refine) {
        const VectorXd res = rhs - M * d.dy;
        d.dy += use_llt ? VectorXd(Mchol.solve(res)) : VectorXd(Mldlt.solve(res));
      }
      d.dZ = Aadj(d.dy);
      d.dX.resize(nb);
      for (size_t k = 0; k < nb; ++k) {
        d.dZ[k] = Rd[k] - d.dZ[k];
        MatrixXd dx = target * Zinv[k] - X[k] - X[k] * d.dZ[k] * Zinv[k];
        if (corr != nullptr) dx -= C2[k];
        d.dX[k] = sym(dx);
      }
      return d;
    };

    const double frac = 0.95;
    const Direction pred = direction(0.0, nullptr);
    const double ap = std::min(1.0, frac * max_step(X, pred.dX));
    const double ad = std::min(1.0, frac * max_step(Z, pred.dZ));
    double mu_aff = 0.0;
    for (size_t k = 0; k < nb; ++k)
      mu_aff += (X[k] + ap * pred.dX[k]).cwiseProduct(Z[k] + ad * pred.dZ[k]).sum();
    mu_aff /= N;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    BlockMatrix corr(nb);
    for (size_t k = 0; k < nb; ++k) corr[k] = pred.dX[k] * pred.dZ[k] * Zinv[k];
    const Direction dir = direction(sigma * mu, &corr);
    const double ap2 = std::min(1.0, frac * max_step(X, dir.dX));
    const double ad2 = std::min(1.0, frac * max_step(Z, dir.dZ));
    for (size_t k = 0; k < nb; ++k) {
      X[k] = sym(X[k] + ap2 * dir.dX[k]);
      Z[k] = sym(Z[k] + ad2 * dir.dZ[k]);
    }
    y += ad2 * dir.dy;
  }
  sol.status = SdpStatus::kNonConvergence;
  return unscale(sol);
}

namespace {

MatrixXd sym_unit(int dim, int k, int l) {
  MatrixXd E = MatrixXd::Zero(dim, dim);
  if (k == l) {
    E(k, k) = 1.0;
  } else {
    E(k, l) = E(l, k) = 0.5;
  }
  return E;
}

MatrixXd cost_block(const MatrixXd& Q, const MatrixXd& R) {
  const auto n = Q.rows(), mi = R.rows();
  MatrixXd C = MatrixXd::Zero(n + mi, n + mi);
  C.topLeftCorner(n, n) = Q;
  C.bottomRightCorner(mi, mi) = R;
  return C;
}

// y indexed over (k <= l) pairs in row-major order -> symmetric P.
MatrixXd dual_matrix(const VectorXd& y, int n) {
  MatrixXd P(n, n);
  int idx = 0;
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l, ++idx) {
      if (k == l) {
        P(k, k) = y(idx);
      } else {
        P(k, l) = P(l, k) = 0.5 * y(idx);
      }
    }
  return P;
}

double noise_scale(const MatrixXd& W) {
  const double w = W.trace() / static_cast<double>(W.rows());
  if (!(w > 0.0)) throw std::invalid_argument("noise covariance must be positive definite");
  return w;
}

double cond_spd(const MatrixXd& V) {
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(V, Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1) / ev(0);
}

MatrixXd spd_inverse(const MatrixXd& V) {
  Eigen::LLT<MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("shape matrix V must be positive definite");
  return sym(llt.solve(MatrixXd::Identity(V.rows(), V.cols())));
}

void check_problem(const MatrixXd& theta, const MatrixXd& Q, const MatrixXd& R, const MatrixXd& W) {
  const auto n = theta.cols();
  if (Q.rows() != n || W.rows() != n || theta.rows() != n + R.rows())
    throw std::invalid_argument("sdp: dimension mismatch");
}

// Relaxed program in standard form over blocks (Sigma, S):
//   Sigma_xx - Theta^T Sigma Theta + mu (Sigma . Vinv) I - S = Wn.
ConicProblem relaxed_conic(const SdpProblem& p, const MatrixXd& Wn, bool with_slack,
                           const MatrixXd& Vinv) {
  const int n = static_cast<int>(p.theta.cols());
  const int d = static_cast<int>(p.theta.rows());
  ConicProblem cp;
  cp.blocks = with_slack ? std::vector<int>{d, n} : std::vector<int>{d};
  cp.C.push_back(cost_block(p.Q, p.R));
  if (with_slack) cp.C.push_back(MatrixXd::Zero(n, n));
  const int mc = n * (n + 1) / 2;
  cp.b.resize(mc);
  int idx = 0;
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l, ++idx) {
      BlockMatrix Ai;
      MatrixXd A1 = sym_unit(d, k, l) -
                    0.5 * (p.theta.col(k) * p.theta.col(l).transpose() +
                           p.theta.col(l) * p.theta.col(k).transpose());
      if (k == l && p.mu != 0.0) A1 += p.mu * Vinv;
      Ai.push_back(A1);
      if (with_slack) Ai.push_back(-sym_unit(n, k, l));
      cp.A.push_back(std::move(Ai));
      cp.b(idx) = Wn(k, l);
    }
  return cp;
}

SdpSolution finish(const ConicSolution& cs, int n, double w, const SdpProblem& p,
                   const MatrixXd& Vinv, bool exact) {
  SdpSolution s;
  s.n = n;
  s.status = cs.status;
  s.iterations = cs.iterations;
  s.Sigma = w * cs.X[0];
  s.objective = w * cs.primal_objective;
  s.dual_P = dual_matrix(cs.y, n);
  const MatrixXd lhs = s.Sigma.topLeftCorner(n, n) - p.theta.transpose() * s.Sigma * p.theta - p.W;
  if (exact) {
    s.residual = lhs.cwiseAbs().maxCoeff();
  } else {
    const MatrixXd slack = lhs + p.mu * s.Sigma.cwiseProduct(Vinv).sum() * MatrixXd::Identity(n, n);
    const double l1 = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(slack), Eigen::EigenvaluesOnly).eigenvalues()(0);
    s.residual = std::max(0.0, -l1);
  }
  const double l0 = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(s.Sigma), Eigen::EigenvaluesOnly).eigenvalues()(0);
  s.residual = std::max(s.residual, -l0);
  return s;
}

}  // namespace

SdpSolution solve_exact_sdp(const MatrixXd& theta, const MatrixXd& Q, const MatrixXd& R_i,
                            const MatrixXd& W, double tol) {
  check_problem(theta, Q, R_i, W);
  SdpProblem p{Q, R_i, theta, MatrixXd(), W, 0.0};
  const double w = noise_scale(W);
  const int n = static_cast<int>(theta.cols());
  const ConicSolution cs = solve_conic(relaxed_conic(p, W / w, false, MatrixXd()), {tol, 500});
  if (cs.status != SdpStatus::kOptimal)
    throw SdpError("exact SDP: " + to_string(cs.status), cs.status, 0.0, 1.0);
  return finish(cs, n, w, p, MatrixXd(), true);
}

SdpSolution solve_relaxed_sdp(const SdpProblem& problem, double tol) {
  check_problem(problem.theta, problem.Q, problem.R, problem.W);
  if (problem.mu < 0.0) throw std::invalid_argument("relaxed SDP: mu must be nonnegative");
  if (problem.V.rows() != problem.theta.rows())
    throw std::invalid_argument("relaxed SDP: V dimension mismatch");
  const MatrixXd Vinv = spd_inverse(problem.V);
  const double w = noise_scale(problem.W);
  const int n = static_cast<int>(problem.theta.cols());
  const ConicSolution cs = solve_conic(relaxed_conic(problem, problem.W / w, true, Vinv), {tol, 500});
  if (cs.status != SdpStatus::kOptimal)
    throw SdpError("relaxed SDP: " + to_string(cs.status) + " (mu=" + std::to_string(problem.mu) +
                       ", cond(V)=" + std::to_string(cond_spd(problem.V)) + ")",
                   cs.status, problem.mu, cond_spd(problem.V));
  return finish(cs, n, w, problem, Vinv, false);
}

MatrixXd extract_gain(const SdpSolution& solution) {
  const int n = solution.n;
  const int mi = static_cast<int>(solution.Sigma.rows()) - n;
  if (n <= 0 || mi < 0) throw std::invalid_argument("extract_gain: malformed solution");
  const MatrixXd Sxx = solution.Sigma.topLeftCorner(n, n);
  Eigen::LLT<MatrixXd> llt(Sxx);
  if (llt.info() != Eigen::Success) throw std::runtime_error("extract_gain: Sigma_xx is singular");
  const VectorXd dg = llt.matrixL().toDenseMatrix().diagonal();
  if (dg.minCoeff() <= 1e-12 * dg.maxCoeff())
    throw std::runtime_error("extract_gain: Sigma_xx is numerically singular");
  // K = Sigma_ux Sigma_xx^{-1}  <=>  Sigma_xx K^T = Sigma_xu.
  return llt.solve(solution.Sigma.topRightCorner(n, mi)).transpose();
}

MatrixXd solve_relaxed_dual(const SdpProblem& p, double tol) {
  check_problem(p.theta, p.Q, p.R, p.W);
  if (p.V.rows() != p.theta.rows()) throw std::invalid_argument("relaxed dual: V dimension mismatch");
  if (p.mu < 0.0) throw std::invalid_argument("relaxed dual: mu must be nonnegative");
  const int n = static_cast<int>(p.theta.cols());
  const int d = static_cast<int>(p.theta.rows());
  const MatrixXd Vinv = spd_inverse(p.V);
  const double w = noise_scale(p.W);

  // With P >= 0 the nuclear norm is tr(P), so the program is linear. P >= 0 is
  // inactive at the optimum ((alpha0/2) I <= P), so first solve with P free:
  //   max W . P  s.t.  C - [diag(P, 0) - Theta P Theta^T + mu tr(P) Vinv] >= 0,
  // i.e. the conic dual of the equality-constrained primal (no slack block).
  {
    const ConicSolution cs = solve_conic(relaxed_conic(p, p.W / w, false, Vinv), {tol, 500});
    if (cs.status == SdpStatus::kOptimal) {
      const MatrixXd P = dual_matrix(cs.y, n);
      const double lp = Eigen::SelfAdjointEigenSolver<MatrixXd>(P, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (lp >= -1e-9 * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
    }
  }

  // Otherwise keep P as a PSD block: variables (P, Zs) with
  //   Zs + diag(P, 0) - Theta P Theta^T + mu tr(P) Vinv = C.
  const MatrixXd C = cost_block(p.Q, p.R);
  ConicProblem cp;
  cp.blocks = {n, d};
  cp.C = {-(p.W / w), MatrixXd::Zero(d, d)};
  cp.b.resize(d * (d + 1) / 2);
  int idx = 0;
  for (int a = 0; a < d; ++a)
    for (int c = a; c < d; ++c, ++idx) {
      MatrixXd G = -0.5 * (p.theta.row(a).transpose() * p.theta.row(c) +
                           p.theta.row(c).transpose() * p.theta.row(a));
      if (a < n && c < n) G += sym_unit(n, a, c);
      G += p.mu * Vinv(a, c) * MatrixXd::Identity(n, n);
      cp.A.push_back({G, sym_unit(d, a, c)});
      cp.b(idx) = C(a, c);
    }
  const ConicSolution cs = solve_conic(cp, {tol, 500});
  if (cs.status != SdpStatus::kOptimal)
    throw SdpError("relaxed dual: " + to_string(cs.status), cs.status, p.mu, cond_spd(p.V));
  return cs.X[0];
}

void write_sdp_instance(std::ostream& os, const SdpProblem& p) {
  auto put = [&](const char* name, const MatrixXd& M) {
    os << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
    for (int i = 0; i < M.rows(); ++i) {
      for (int j = 0; j < M.cols(); ++j) os << (j ? " " : "") << M(i, j);
      os << '\n';
    }
  };
  const auto old = os.precision(17);
  os << "sdp " << p.theta.cols() << ' ' << p.R.rows() << '\n' << "mu " << p.mu << '\n';
  put("Q", p.Q);
  put("R", p.R);
  put("Theta", p.theta);
  put("V", p.V);
  put("W", p.W);
  os.precision(old);
}

}  // namespace lcsw
