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

#include "lcsw/regret.hpp"

#include <cmath>
#include <string>

#include "lcsw/estimation.hpp"

namespace lcsw {

RegretReport regret_curve(const TrajectoryLog& log, const std::map<int, double>& jstar_by_mode) {
  RegretReport rep;
  rep.jstar = jstar_by_mode;
  rep.instantaneous.reserve(log.steps.size());
  rep.cumulative.reserve(log.steps.size());
  double acc = 0.0;
  for (const auto& s : log.steps) {
    const auto it = jstar_by_mode.find(s.mode_id);
    if (it == jstar_by_mode.end())
      throw MissingDataError("regret_curve: no J* for mode " + std::to_string(s.mode_id));
    const double r = s.cost - it->second;
    acc += r;
    rep.instantaneous.push_back(r);
    rep.cumulative.push_back(acc);
  }
  return rep;
}

std::map<int, double> jstar_by_mode(const LinearSwitchedSystem& sys) {
  std::map<int, double> out;
  for (const auto& md : sys.modes) out[md.id] = optimal_avg_cost(sys, md);
  return out;
}

GoodEvent good_event_check(const TrajectoryLog& log, const GoodEventParams& p) {
  GoodEvent ev;
  ev.holds.reserve(log.steps.size());
  if (log.steps.empty()) return ev;
  const double x0 = log.steps.front().x.squaredNorm();
  const double floor = p.upsilon_bar / (2.0 * p.gamma_star * p.gamma_star);
  const double decay = 2.0 * std::log1p(-p.chi);
  for (const auto& s : log.steps) {
    const double z2 = s.x.squaredNorm() + s.u.squaredNorm();
    const double env = 4.0 * p.kappa_star * p.kappa_star * std::exp(decay * s.t) * x0 + floor;
    const bool state_ok = z2 <= env;
    const bool ok = s.theta_in_set && state_ok;
    if (!s.theta_in_set) ++ev.set_violations;
    if (!state_ok) ++ev.state_violations;
    if (!ok) ++ev.violations;
    ev.holds.push_back(ok);
  }
  return ev;
}

Decomposition decompose_regret(const TrajectoryLog& log, const LinearSwitchedSystem& sys,
                               const std::map<int, double>& jstar, const std::vector<bool>& good) {
  if (good.size() != log.steps.size()) throw std::invalid_argument("decompose_regret: event stream length mismatch");
  const double s2 = sys.sigma_w * sys.sigma_w;
  const double c4 = 4.0 * sys.nu_bound / s2;
  Decomposition d;
  const size_t N = log.steps.size();
  for (auto* v : {&d.r1, &d.r2, &d.r3, &d.r4, &d.r4_lemma, &d.realized}) v->reserve(N);
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, ar = 0;
  std::map<int, ModeMatrices> mats;
  for (const auto& md : sys.modes) mats[md.id] = mode_submatrices(sys, md);
  for (size_t k = 0; k < N; ++k) {
    const auto& s = log.steps[k];
    if (s.policy_id < 0 || s.policy_id >= static_cast<int>(log.policies.size()) ||
        log.policies[s.policy_id].P.size() == 0)
      throw MissingDataError("decompose_regret: missing dual snapshot at t=" + std::to_string(s.t));
    const auto it = jstar.find(s.mode_id);
    if (it == jstar.end()) throw MissingDataError("decompose_regret: no J* for mode " + std::to_string(s.mode_id));
    const auto& pol = log.policies[s.policy_id];
    const MatrixXd& P = pol.P;
    const auto& mm = mats.at(s.mode_id);
    const VectorXd w = s.x_next - sys.A * s.x - mm.B_i * s.u;
    if (s.w.size() == w.size()) d.max_noise_error = std::max(d.max_noise_error, (w - s.w).cwiseAbs().maxCoeff());
    if (good[k]) {
      a1 += s.x.dot(P * s.x) - s.x_next.dot(P * s.x_next);
      a2 += w.dot(P * ((sys.A + mm.B_i * pol.K) * s.x));
      a3 += w.dot(P * w) - s2 * P.trace();
      a4 += s.mu * s.z_vinv_z;
      ar += s.cost - it->second;
    }
    d.r1.push_back(a1);
    d.r2.push_back(a2);
    d.r3.push_back(a3);
    d.r4.push_back(c4 * a4);
    d.r4_lemma.push_back(2.0 * c4 * a4);
    d.realized.push_back(ar);
  }
  return d;
}

namespace {

void check_inputs(const BoundInputs& in) {
  if (!(in.n > 0 && in.m > 0 && in.ns > 0 && in.T > 1.0 && in.sigma_w > 0.0 && in.theta_bound > 0.0 &&
        in.nu_bar > 0.0 && in.kappa_star > 0.0 && in.gamma_star > 0.0 && in.chi > 0.0 && in.lambda > 0.0 &&
        in.epsilon >= 0.0))
    throw std::invalid_argument("theoretical_bound: parameters must be positive (T > 1)");
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw std::invalid_argument("theoretical_bound: delta must lie in (0, 1)");
}

}  // namespace

BoundTerms theoretical_bound(const BoundInputs& in) {
  check_inputs(in);
  BoundTerms b;
  const double s2 = in.sigma_w * in.sigma_w;
  b.upsilon_bar = upsilon_bar(in.kappa_star, in.chi, in.sigma_w, in.n, in.T, in.delta);
  const double g = 1.0 + 2.0 * b.upsilon_bar;
  b.rbar = rbar_upper_bound(in.n, in.m, in.delta, in.sigma_w, b.upsilon_bar, in.T, in.epsilon, in.lambda);
  b.n_ts = g * std::log(in.T) + (in.ns - 1) * (in.m - 1) * std::log(g * in.T);
  b.x_bound = std::sqrt(2.0 * in.x0_norm * in.x0_norm +
                        800.0 * in.kappa_star * in.kappa_star * s2 * in.n * std::log(in.T / in.delta) /
                            (in.chi * in.chi * in.gamma_star * in.gamma_star));
  b.r1 = in.nu_bar * (1.0 + b.n_ts) / s2 * b.x_bound;
  b.r2 = in.nu_bar * in.theta_bound / in.sigma_w * std::sqrt(3.0 * b.upsilon_bar * in.T * std::log(4.0 / in.delta));
  b.r3 = 8.0 * in.nu_bar * std::sqrt(in.T * std::pow(std::log(4.0 * in.T / in.delta), 3));
  const double mu_bar = b.rbar + (1.0 + b.rbar) * in.theta_bound * std::sqrt(g * in.T);
  b.r4 = 8.0 * in.nu_bar / s2 * mu_bar * (g * std::log(in.T) + (in.ns - 1) * std::log(g * in.T));
  b.total = b.r1 + b.r2 + b.r3 + b.r4;
  return b;
}

double default_lambda(const BoundInputs& in, double alpha0, double* mu_bar) {
  check_inputs(in);
  // rbar depends on lambda through its 2 eps lambda term, so solve the
  // linear fixed point lambda = c (a + 2 eps lambda + (1 + a + 2 eps lambda) s).
  const double ups = upsilon_bar(in.kappa_star, in.chi, in.sigma_w, in.n, in.T, in.delta);
  const double a = rbar_upper_bound(in.n, in.m, in.delta, in.sigma_w, ups, in.T, 0.0, 1.0);
  const double s = in.theta_bound * std::sqrt((1.0 + 2.0 * ups) * in.T);
  const double c = 4.0 * in.nu_bar / (alpha0 * in.sigma_w * in.sigma_w);
  const double denom = 1.0 - 2.0 * in.epsilon * c * (1.0 + s);
  if (!(denom > 0.0))
    throw std::invalid_argument("default_lambda: no finite lambda satisfies the rule for this epsilon; set lcsa.lambda");
  const double lambda = c * (a + (1.0 + a) * s) / denom;
  if (mu_bar) {
    const double rb = a + 2.0 * in.epsilon * lambda;
    *mu_bar = rb + (1.0 + rb) * s;
  }
  return lambda;
}

}  // namespace lcsw
