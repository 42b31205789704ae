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

#include "lcsw/control.hpp"

#include <algorithm>
#include <cmath>

namespace lcsw {

StabilityParams stability_params(double nu, double alpha0, double sigma_w) {
  if (!(nu > 0.0 && alpha0 > 0.0 && sigma_w > 0.0))
    throw std::invalid_argument("stability_params: inputs must be positive");
  StabilityParams p;
  p.kappa = std::sqrt(2.0 * nu / (alpha0 * sigma_w * sigma_w));
  if (!(p.kappa * p.kappa > 0.5))
    throw std::invalid_argument("stability_params: kappa^2 must exceed 1/2 so that gamma < 1");
  p.gamma = 1.0 / (2.0 * p.kappa * p.kappa);
  return p;
}

long compute_madt(double kappa_star, double gamma_star, double chi) {
  if (!(chi > 0.0 && chi < gamma_star / 2.0 && gamma_star / 2.0 < 1.0))
    throw std::invalid_argument("compute_madt: requires 0 < chi < gamma*/2 < 1");
  if (!(kappa_star > 1.0)) throw std::invalid_argument("compute_madt: requires kappa* > 1");
  const double v = std::log(kappa_star) / (std::log1p(-chi) - std::log1p(-gamma_star));
  return static_cast<long>(std::ceil(v));
}

double warmup_lhs(const WarmupConfig& cfg, int n, double delta, double sigma_w, double lambda,
                  double theta_bound, double T0) {
  const double k2 = cfg.kappa0 * cfg.kappa0;
  const double inner = 1.0 + 300.0 * sigma_w * sigma_w * k2 * k2 / (cfg.gamma0 * cfg.gamma0) *
                                 (n + theta_bound * theta_bound * k2) * std::log(T0 / delta);
  const double s = sigma_w * std::sqrt(2.0 * n * (std::log(n / delta) + std::log(inner))) +
                   std::sqrt(lambda) * theta_bound;
  return 80.0 / (T0 * sigma_w * sigma_w) * s * s;
}

long warmup_duration(const WarmupConfig& cfg, int n, int /*m*/, double delta, double sigma_w,
                     double lambda, double theta_bound, double alpha0) {
  if (!(cfg.C0 > 0.0 && cfg.eps0 > 0.0)) throw std::invalid_argument("warmup_duration: C0, eps0 must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("warmup_duration: delta must lie in (0, 1)");
  const double eps2 = std::min(cfg.kappa0 * cfg.kappa0 * alpha0 * sigma_w * sigma_w / cfg.C0,
                               cfg.eps0 * cfg.eps0);
  auto ok = [&](long T) { return warmup_lhs(cfg, n, delta, sigma_w, lambda, theta_bound, T) <= eps2; };
  const long cap = 1000000000L;
  long hi = 1;
  while (!ok(hi)) {
    if (hi >= cap) throw std::invalid_argument("warmup_duration: no T0 <= 1e9 satisfies the bound (epsilon too small)");
    hi = std::min(hi * 2, cap);
  }
  long lo = hi / 2;  // ok(lo) is false unless lo == 0
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

WarmupResult run_warmup(const LinearSwitchedSystem& sys, const WarmupConfig& cfg, double delta,
                        unsigned long long seed) {
  const int n = sys.n(), m = sys.m();
  if (cfg.K0.rows() != m || cfg.K0.cols() != n) throw std::invalid_argument("run_warmup: K0 must be m x n");
  if (spectral_radius(sys.A + sys.B * cfg.K0) >= 1.0) throw std::invalid_argument("run_warmup: K0 is not stabilizing");
  const double lambda = sys.sigma_w * sys.sigma_w / (sys.theta_bound * sys.theta_bound);
  WarmupResult res;
  res.T0 = cfg.T0 ? *cfg.T0
                  : warmup_duration(cfg, n, m, delta, sys.sigma_w, lambda, sys.theta_bound, sys.alpha0);
  res.estimator = init_estimator(lambda, n, m);
  const Mode& full = sys.mode(1);
  const NoiseModel noise{NoiseKind::kGaussian, sys.sigma_w, seed};
  const double eta_sd = std::sqrt(2.0) * sys.sigma_w * cfg.kappa0;
  VectorXd x = VectorXd::Zero(n);
  res.log.steps.reserve(res.T0);
  for (long t = 0; t < res.T0; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.mode_id = full.id;
    rec.x = x;
    rec.u = cfg.K0 * x + sample_noise(noise, kExplorationNoise, t, m, eta_sd);
    rec.w = sample_noise(noise, kWarmupProcessNoise, t, n);
    rec.x_next = step(sys, x, rec.u, full, rec.w);
    rec.cost = stage_cost(sys, x, rec.u, full);
    rec.logdet_v = log_det_spd(res.estimator.V);
    VectorXd z(n + m);
    z << x, rec.u;
    absorb_observation(res.estimator, z, rec.x_next);
    if (!(rec.x_next.norm() < 1e6)) throw RunAbort("run_warmup: state norm exceeded 1e6 (bad K0?)");
    x = rec.x_next;
    res.log.steps.push_back(std::move(rec));
  }
  res.central = current_ellipsoid(res.estimator, delta, sys.theta_bound, sys.sigma_w);
  return res;
}

double compute_mu(double r, double theta_bound, const MatrixXd& V, double scale) {
  const double vmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(V, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  return scale * (r + (1.0 + r) * theta_bound * std::sqrt(vmax));
}

const Mode& select_next_mode(const ConfidenceEllipsoid& central, const std::vector<Mode>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_next_mode: no candidates");
  const Mode* best = nullptr;
  double best_ld = 0.0;
  for (const auto& md : candidates) {
    const double ld = log_det_spd(project_to_mode(central, md).ellipsoid.shape);
    // Relative tolerance keeps ties deterministic under round-off.
    const double tie = 1e-12 * std::max(1.0, std::abs(ld));
    if (best == nullptr || ld > best_ld + tie || (std::abs(ld - best_ld) <= tie && md.id < best->id)) {
      best = &md;
      best_ld = ld;
    }
  }
  return *best;
}

void validate_schedule(const SwitchSchedule& schedule, const LinearSwitchedSystem& sys,
                       long horizon, bool madt_enforce, long tau_mad) {
  const auto& ev = schedule.events;
  if (ev.empty()) throw std::invalid_argument("schedule: at least one switch event required");
  if (ev.front().time != 0) throw std::invalid_argument("schedule: first switch time must be 0");
  for (size_t k = 0; k < ev.size(); ++k) {
    if (k > 0 && ev[k].time <= ev[k - 1].time)
      throw std::invalid_argument("schedule: switch times must be strictly increasing");
    if (ev[k].time >= horizon) throw std::invalid_argument("schedule: switch time beyond the horizon");
    if (ev[k].mode_id == 0) {
      if (schedule.candidates.empty())
        throw std::invalid_argument("schedule: automatic switch without candidate modes");
    } else {
      sys.mode(ev[k].mode_id);
    }
    if (madt_enforce && k > 0 && ev[k].time - ev[k - 1].time < tau_mad)
      throw std::invalid_argument("schedule: gap " + std::to_string(ev[k].time - ev[k - 1].time) +
                                  " at switch " + std::to_string(k) + " is below the minimum average dwell time " +
                                  std::to_string(tau_mad));
  }
  for (int id : schedule.candidates) sys.mode(id);
}

std::string to_string(Strategy s) { return s == Strategy::kLcsa ? "lcsa" : "naive"; }

namespace {

ConfidenceEllipsoid naive_prior(const ConfidenceEllipsoid& initial, const Mode& mode, double lambda) {
  const int n = static_cast<int>(initial.center.cols());
  ConfidenceEllipsoid e;
  e.center.resize(n + mode.dim(), n);
  e.center.topRows(n) = initial.center.topRows(n);
  for (int j = 0; j < mode.dim(); ++j) e.center.row(n + j) = initial.center.row(n + mode.actuators[j] - 1);
  e.shape = lambda * MatrixXd::Identity(n + mode.dim(), n + mode.dim());
  e.radius = initial.radius;
  e.dim_d = mode.dim();
  return e;
}

MatrixXd select_rows(const MatrixXd& full, const Mode& mode, int n) {
  MatrixXd out(n + mode.dim(), full.cols());
  out.topRows(n) = full.topRows(n);
  for (int j = 0; j < mode.dim(); ++j) out.row(n + j) = full.row(n + mode.actuators[j] - 1);
  return out;
}

TrajectoryLog run_strategy(const LinearSwitchedSystem& sys, const SwitchSchedule& schedule,
                           const ConfidenceEllipsoid& initial, const LcsaParams& params,
                           unsigned long long seed, Strategy strategy) {
  const int n = sys.n(), m = sys.m();
  const long T = params.horizon;
  if (initial.center.rows() != n + m || initial.center.cols() != n)
    throw std::invalid_argument("run: initial ellipsoid must cover all actuators");
  const auto& ev = schedule.events;
  if (ev.empty() || ev.front().time != 0) throw std::invalid_argument("run: invalid schedule");

  TrajectoryLog log;
  log.meta.seed = seed;
  log.meta.strategy = to_string(strategy);
  log.meta.lambda = params.lambda;
  log.meta.mu_scale = params.mu_scale;
  log.meta.r0 = initial.radius;
  log.steps.reserve(T);

  const NoiseModel noise{NoiseKind::kGaussian, sys.sigma_w, seed};
  const MatrixXd W = sys.sigma_w * sys.sigma_w * MatrixXd::Identity(n, n);
  const MatrixXd theta_full = stack_theta(sys.A, sys.B);
  EstimatorState central = init_estimator(initial);
  std::vector<MatrixXd> standalone;  // per mode index in sys.modes: lambda I + mode-only data
  for (const auto& md : sys.modes)
    standalone.push_back(params.lambda * MatrixXd::Identity(n + md.dim(), n + md.dim()));
  auto mode_index = [&](int id) {
    for (size_t k = 0; k < sys.modes.size(); ++k)
      if (sys.modes[k].id == id) return k;
    throw std::out_of_range("unknown mode id");
  };

  VectorXd x = params.x0.size() == n ? params.x0 : VectorXd::Zero(n);
  const double log2v = std::log(2.0);
  for (size_t k = 0; k < ev.size(); ++k) {
    const long ts = ev[k].time;
    const long te = k + 1 < ev.size() ? ev[k + 1].time : T;
    const ConfidenceEllipsoid cen = current_ellipsoid(central, params.delta, sys.theta_bound, sys.sigma_w);
    std::vector<Mode> cands;
    for (int id : schedule.candidates) cands.push_back(sys.mode(id));
    const Mode mode = ev[k].mode_id == 0 ? select_next_mode(cen, cands) : sys.mode(ev[k].mode_id);
    const auto mm = mode_submatrices(sys, mode);
    const MatrixXd theta_true = select_rows(theta_full, mode, n);

    EpochRecord er;
    er.epoch = static_cast<int>(k);
    er.mode_id = mode.id;
    er.start = ts;
    er.end = te;
    er.central_logdet = log_det_spd(central.V);
    const Projection proj = project_to_mode(cen, mode);
    er.ratio = logdet_ratio_check(central.V, proj.ellipsoid.shape, m, params.upsilon_bar, std::max<double>(ts, 1.0));
    er.standalone_logdet = log_det_spd(standalone[mode_index(mode.id)]);
    const ConfidenceEllipsoid prior =
        (strategy == Strategy::kNaive && k > 0) ? naive_prior(initial, mode, params.lambda) : proj.ellipsoid;
    EstimatorState est = init_estimator(prior);
    er.prior_logdet = est.prior_logdet;

    MatrixXd K;
    int policy_id = -1;
    double ld_tau = 0.0;
    for (long t = ts; t < te; ++t) {
      StepRecord rec;
      rec.t = t;
      rec.mode_id = mode.id;
      rec.epoch = static_cast<int>(k);
      rec.x = x;
      Eigen::LLT<MatrixXd> vllt(est.V);
      const double ld = 2.0 * vllt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      rec.logdet_v = ld;
      const double r = radius_inherited(est, params.delta, sys.sigma_w);
      rec.radius = r;
      const MatrixXd center = vllt.solve(est.zx_accum + est.prior_shape * est.prior_center);
      {
        const MatrixXd D = theta_true - center;
        rec.theta_in_set = (D.transpose() * est.V * D).trace() <= r + 1e-12;
      }
      if (t == ts || ld > ld_tau + log2v + params.logdet_slack) {
        ld_tau = ld;
        rec.policy_update = true;
        PolicyRecord pr;
        pr.t = t;
        pr.epoch = static_cast<int>(k);
        pr.mode_id = mode.id;
        pr.radius = r;
        pr.mu = compute_mu(r, sys.theta_bound, est.V, params.mu_scale);
        const SdpProblem prob{sys.Q, mm.R_i, center, est.V, W, pr.mu};
        try {
          const SdpSolution sol = solve_relaxed_sdp(prob, params.sdp_tol);
          pr.K = extract_gain(sol);
          pr.P = *sol.dual_P;
          pr.objective = sol.objective;
          pr.status = "optimal";
        } catch (const std::exception& err) {
          // Infeasible or unsolved relaxed program: keep the previous policy;
          // at an epoch start fall back to the certainty-equivalent program.
          pr.fallback = true;
          if (policy_id >= 0) {
            pr.K = K;
            pr.P = log.policies[policy_id].P;
            pr.status = "retained";
          } else {
            try {
              const SdpSolution sol = solve_exact_sdp(center, sys.Q, mm.R_i, W, params.sdp_tol);
              pr.K = extract_gain(sol);
              pr.P = *sol.dual_P;
              pr.objective = sol.objective;
              pr.status = "certainty_equivalent";
            } catch (const std::exception& err2) {
              throw RunAbort(std::string("no policy available at epoch start: ") + err.what() + "; " + err2.what());
            }
          }
        }
        pr.rho_true = spectral_radius(sys.A + mm.B_i * pr.K);
        K = pr.K;
        log.policies.push_back(std::move(pr));
        policy_id = static_cast<int>(log.policies.size()) - 1;
        rec.sdp_status = log.policies.back().status;
        ++er.updates;
      }
      rec.policy_id = policy_id;
      rec.mu = log.policies[policy_id].mu;
      rec.u = K * x;
      VectorXd z(n + mode.dim());
      z << x, rec.u;
      rec.z_vinv_z = z.dot(vllt.solve(z));
      rec.w = sample_noise(noise, kProcessNoise, t, n);
      rec.x_next = step(sys, x, rec.u, mode, rec.w);
      rec.cost = stage_cost(sys, x, rec.u, mode);
      absorb_observation(est, z, rec.x_next);
      VectorXd zc(n + m);
      zc << x, augment_input(rec.u, mode, m);
      absorb_observation(central, zc, rec.x_next);
      standalone[mode_index(mode.id)].noalias() += z * z.transpose();
      if (!(rec.x_next.norm() < params.state_abort))
        throw RunAbort("state norm exceeded " + std::to_string(params.state_abort) + " at t=" + std::to_string(t) +
                       " (" + to_string(strategy) + ", seed " + std::to_string(seed) + ")");
      x = rec.x_next;
      log.steps.push_back(std::move(rec));
    }
    er.end_logdet = log_det_spd(est.V);
    log.epochs.push_back(er);
  }
  return log;
}

}  // namespace

TrajectoryLog run_lcsa(const LinearSwitchedSystem& sys, const SwitchSchedule& schedule,
                       const ConfidenceEllipsoid& initial, const LcsaParams& params,
                       unsigned long long seed) {
  return run_strategy(sys, schedule, initial, params, seed, Strategy::kLcsa);
}

TrajectoryLog run_naive_baseline(const LinearSwitchedSystem& sys, const SwitchSchedule& schedule,
                                 const ConfidenceEllipsoid& initial, const LcsaParams& params,
                                 unsigned long long seed) {
  return run_strategy(sys, schedule, initial, params, seed, Strategy::kNaive);
}

double state_norm_bound(double kappa, double gamma, double x0_norm, double t_rel, double sigma_w,
                        int n, double delta) {
  if (!(kappa > 0.0 && gamma > 0.0 && t_rel >= 1.0 && sigma_w > 0.0 && delta > 0.0))
    throw std::invalid_argument("state_norm_bound: invalid parameters");
  return kappa * std::exp(-gamma * (t_rel - 1.0) / 2.0) * x0_norm +
         (20.0 * kappa / gamma) * sigma_w * std::sqrt(n * std::log(t_rel / delta));
}

double switched_state_bound(const MadtParams& madt, double x0_norm, double t, double sigma_w, int n,
                            double T, double delta) {
  const double u_omega =
      (20.0 * madt.kappa_star / (madt.chi * madt.gamma_star)) * sigma_w * std::sqrt(n * std::log(T / delta));
  return std::exp(-madt.chi * t) * x0_norm + u_omega;
}

}  // namespace lcsw
