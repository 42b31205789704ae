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

#include "lcsw/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "lcsw/report_io.hpp"

namespace lcsw {

using nlohmann::json;

namespace {

MatrixXd matrix_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(field + ": expected a non-empty array of rows");
  const auto rows = j.size(), cols = j[0].size();
  MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(field + ": ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(field + ": non-numeric entry");
      M(r, c) = j[r][c].get<double>();
    }
  }
  return M;
}

json matrix_to(const MatrixXd& M) {
  json j = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    j.push_back(row);
  }
  return j;
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key + ": missing");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

const json& section(const json& root, const char* key) {
  if (!root.contains(key) || !root.at(key).is_object()) throw ConfigError(std::string(key) + ": missing object");
  return root.at(key);
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return write_config(*this) == write_config(o);
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  c.name = get_or<std::string>(root, "name", c.name, "config");

  const json& sj = section(root, "system");
  auto& sys = c.system;
  sys.A = matrix_from(get<json>(sj, "A", "system"), "system.A");
  sys.B = matrix_from(get<json>(sj, "B", "system"), "system.B");
  sys.Q = matrix_from(get<json>(sj, "Q", "system"), "system.Q");
  sys.R = matrix_from(get<json>(sj, "R", "system"), "system.R");
  sys.sigma_w = get<double>(sj, "sigma_w", "system");
  sys.theta_bound = get<double>(sj, "theta_bound", "system");
  sys.nu_bound = get<double>(sj, "nu_bound", "system");
  sys.alpha0 = get<double>(sj, "alpha0", "system");

  const json modes = get<json>(root, "modes", "config");
  if (!modes.is_array() || modes.empty()) throw ConfigError("modes: expected a non-empty array");
  for (const auto& mj : modes) {
    const int id = get<int>(mj, "id", "modes[]");
    try {
      sys.modes.push_back(make_mode(id, get<std::vector<int>>(mj, "actuators", "modes[]")));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("modes[" + std::to_string(id) + "]: " + e.what());
    }
  }

  const json& sch = section(root, "schedule");
  for (const auto& ej : get<json>(sch, "events", "schedule")) {
    SwitchEvent ev;
    ev.time = get<long>(ej, "time", "schedule.events[]");
    ev.mode_id = get<int>(ej, "mode", "schedule.events[]");
    c.schedule.events.push_back(ev);
  }
  c.schedule.candidates = get_or<std::vector<int>>(sch, "candidates", {}, "schedule");

  c.horizon = get<long>(root, "horizon", "config");
  c.delta = get<double>(root, "delta", "config");
  c.epsilon = get_or<double>(root, "epsilon", 0.0, "config");

  if (root.contains("initial_estimate")) {
    const json& ie = section(root, "initial_estimate");
    c.initial_source = get_or<std::string>(ie, "source", c.initial_source, "initial_estimate");
    c.r0_rule = get_or<std::string>(ie, "r0_rule", c.r0_rule, "initial_estimate");
    if (ie.contains("r0")) c.r0 = get<double>(ie, "r0", "initial_estimate");
  }
  if (root.contains("warmup")) {
    const json& wj = section(root, "warmup");
    if (wj.contains("K0")) c.warmup.K0 = matrix_from(wj.at("K0"), "warmup.K0");
    c.warmup.kappa0 = get_or<double>(wj, "kappa0", c.warmup.kappa0, "warmup");
    c.warmup.gamma0 = get_or<double>(wj, "gamma0", c.warmup.gamma0, "warmup");
    c.warmup.C0 = get_or<double>(wj, "C0", c.warmup.C0, "warmup");
    c.warmup.eps0 = get_or<double>(wj, "eps0", c.warmup.eps0, "warmup");
    if (wj.contains("T0")) c.warmup.T0 = get<long>(wj, "T0", "warmup");
    if (wj.contains("delta")) c.warmup.delta = get<double>(wj, "delta", "warmup");
  }
  if (root.contains("lcsa")) {
    const json& lj = section(root, "lcsa");
    if (lj.contains("lambda")) c.lambda = get<double>(lj, "lambda", "lcsa");
    c.mu_scale = get_or<double>(lj, "mu_scale", c.mu_scale, "lcsa");
    if (lj.contains("chi")) c.chi = get<double>(lj, "chi", "lcsa");
    c.gamma_star_rule = get_or<std::string>(lj, "gamma_star_rule", c.gamma_star_rule, "lcsa");
    c.madt_enforce = get_or<bool>(lj, "madt_enforce", c.madt_enforce, "lcsa");
    c.r4_prefactor = get_or<std::string>(lj, "r4_prefactor", c.r4_prefactor, "lcsa");
    c.x0 = get_or<std::vector<double>>(lj, "x0", {}, "lcsa");
  }
  if (root.contains("solver")) c.solver_tol = get_or<double>(section(root, "solver"), "tol", c.solver_tol, "solver");
  c.seeds = get_or<std::vector<unsigned long long>>(root, "seeds", c.seeds, "config");
  c.threads = get_or<int>(root, "threads", c.threads, "config");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  auto cfg = parse_config(ss.str());
  validate_config(cfg);
  return cfg;
}

std::string write_config(const ExperimentConfig& c) {
  json root;
  root["name"] = c.name;
  const auto& s = c.system;
  root["system"] = {{"A", matrix_to(s.A)},         {"B", matrix_to(s.B)},
                    {"Q", matrix_to(s.Q)},         {"R", matrix_to(s.R)},
                    {"sigma_w", s.sigma_w},        {"theta_bound", s.theta_bound},
                    {"nu_bound", s.nu_bound},      {"alpha0", s.alpha0}};
  json modes = json::array();
  for (const auto& md : s.modes) modes.push_back({{"id", md.id}, {"actuators", md.actuators}});
  root["modes"] = modes;
  json events = json::array();
  for (const auto& ev : c.schedule.events) events.push_back({{"time", ev.time}, {"mode", ev.mode_id}});
  root["schedule"] = {{"events", events}, {"candidates", c.schedule.candidates}};
  root["horizon"] = c.horizon;
  root["delta"] = c.delta;
  root["epsilon"] = c.epsilon;
  json ie = {{"source", c.initial_source}, {"r0_rule", c.r0_rule}};
  if (c.r0) ie["r0"] = *c.r0;
  root["initial_estimate"] = ie;
  json w = {{"kappa0", c.warmup.kappa0}, {"gamma0", c.warmup.gamma0}, {"C0", c.warmup.C0}, {"eps0", c.warmup.eps0}};
  if (c.warmup.K0) w["K0"] = matrix_to(*c.warmup.K0);
  if (c.warmup.T0) w["T0"] = *c.warmup.T0;
  if (c.warmup.delta) w["delta"] = *c.warmup.delta;
  root["warmup"] = w;
  json l = {{"mu_scale", c.mu_scale},
            {"gamma_star_rule", c.gamma_star_rule},
            {"madt_enforce", c.madt_enforce},
            {"r4_prefactor", c.r4_prefactor},
            {"x0", c.x0}};
  if (c.lambda) l["lambda"] = *c.lambda;
  if (c.chi) l["chi"] = *c.chi;
  root["lcsa"] = l;
  root["solver"] = {{"tol", c.solver_tol}};
  root["seeds"] = c.seeds;
  root["threads"] = c.threads;
  return root.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& c) {
  try {
    c.system.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  const int n = c.system.n();
  if (c.horizon < 1) throw ConfigError("horizon: must be positive");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta: must lie in (0, 1)");
  if (!(c.epsilon >= 0.0)) throw ConfigError("epsilon: must be non-negative");
  if (c.initial_source != "warmup" && c.initial_source != "perturbed_truth")
    throw ConfigError("initial_estimate.source: expected \"warmup\" or \"perturbed_truth\"");
  if (c.r0_rule != "warmup" && c.r0_rule != "lambda_eps2" && c.r0_rule != "fixed")
    throw ConfigError("initial_estimate.r0_rule: expected \"warmup\", \"lambda_eps2\" or \"fixed\"");
  if (c.r0_rule == "warmup" && c.initial_source != "warmup")
    throw ConfigError("initial_estimate.r0_rule: \"warmup\" requires source \"warmup\"");
  if (c.r0_rule == "fixed" && !(c.r0 && *c.r0 >= 0.0))
    throw ConfigError("initial_estimate.r0: rule \"fixed\" requires a non-negative r0");
  if (c.r0_rule == "lambda_eps2" && !(c.epsilon > 0.0))
    throw ConfigError("epsilon: rule \"lambda_eps2\" requires epsilon > 0");
  if (c.warmup.K0 && (c.warmup.K0->rows() != c.system.m() || c.warmup.K0->cols() != n))
    throw ConfigError("warmup.K0: must be m x n");
  if (!(c.warmup.kappa0 > 0.0 && c.warmup.gamma0 > 0.0 && c.warmup.gamma0 <= 1.0))
    throw ConfigError("warmup: kappa0 > 0 and 0 < gamma0 <= 1 required");
  if (c.warmup.T0 && *c.warmup.T0 < 0) throw ConfigError("warmup.T0: must be non-negative");
  if (c.warmup.delta && !(*c.warmup.delta > 0.0 && *c.warmup.delta < 1.0))
    throw ConfigError("warmup.delta: must lie in (0, 1)");
  if (c.lambda && !(*c.lambda > 0.0)) throw ConfigError("lcsa.lambda: must be positive");
  if (!(c.mu_scale >= 0.0)) throw ConfigError("lcsa.mu_scale: must be non-negative");
  if (c.gamma_star_rule != "squared" && c.gamma_star_rule != "linear")
    throw ConfigError("lcsa.gamma_star_rule: expected \"squared\" or \"linear\"");
  if (c.r4_prefactor != "4nu" && c.r4_prefactor != "8nu" && c.r4_prefactor != "both")
    throw ConfigError("lcsa.r4_prefactor: expected \"4nu\", \"8nu\" or \"both\"");
  if (!c.x0.empty() && static_cast<int>(c.x0.size()) != n) throw ConfigError("lcsa.x0: must have n entries");
  if (!(c.solver_tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds: at least one seed required");
  if (c.threads < 0) throw ConfigError("threads: must be non-negative");
  DerivedParams d;
  try {
    d = derive_params(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("derived parameters: ") + e.what());
  }
  try {
    validate_schedule(c.schedule, c.system, c.horizon, c.madt_enforce, d.tau_mad);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : write_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BoundInputs bound_inputs(const ExperimentConfig& cfg, const DerivedParams& d) {
  BoundInputs in;
  in.n = cfg.system.n();
  in.m = cfg.system.m();
  in.ns = static_cast<int>(cfg.schedule.events.size());
  in.T = static_cast<double>(std::max<long>(cfg.horizon, 2));
  in.delta = cfg.delta;
  in.sigma_w = cfg.system.sigma_w;
  in.theta_bound = cfg.system.theta_bound;
  in.nu_bar = cfg.system.nu_bound;
  in.kappa_star = d.kappa_star;
  in.gamma_star = d.gamma_star;
  in.chi = d.chi;
  in.epsilon = cfg.epsilon;
  in.lambda = d.lambda > 0.0 ? d.lambda : 1.0;
  VectorXd x0 = VectorXd::Zero(cfg.system.n());
  for (size_t k = 0; k < cfg.x0.size(); ++k) x0(k) = cfg.x0[k];
  in.x0_norm = x0.norm();
  return in;
}

MadtParams madt_params(const DerivedParams& d) {
  return MadtParams{d.kappa_star, d.gamma_star, d.chi, d.tau_mad};
}

DerivedParams derive_params(const ExperimentConfig& cfg) {
  const auto& sys = cfg.system;
  DerivedParams d;
  const StabilityParams sp = stability_params(sys.nu_bound, sys.alpha0, sys.sigma_w);
  d.kappa_star = sp.kappa;
  d.gamma_star = cfg.gamma_star_rule == "linear" ? 1.0 / (2.0 * sp.kappa) : sp.gamma;
  d.chi = cfg.chi ? *cfg.chi : d.gamma_star / 4.0;
  try {
    d.tau_mad = compute_madt(d.kappa_star, d.gamma_star, d.chi);
  } catch (const std::invalid_argument& e) {
    if (cfg.madt_enforce) throw ConfigError(std::string("lcsa.chi: ") + e.what());
    d.tau_mad = 0;
  }
  const double T = static_cast<double>(std::max<long>(cfg.horizon, 2));
  d.upsilon_bar = upsilon_bar(d.kappa_star, d.chi, sys.sigma_w, sys.n(), T, cfg.delta);
  BoundInputs in = bound_inputs(cfg, d);
  if (cfg.lambda) {
    d.lambda = *cfg.lambda;
    const double rb = rbar_upper_bound(in.n, in.m, in.delta, in.sigma_w, d.upsilon_bar, T, cfg.epsilon, d.lambda);
    d.mu_bar = rb + (1.0 + rb) * sys.theta_bound * std::sqrt((1.0 + 2.0 * d.upsilon_bar) * T);
  } else {
    try {
      d.lambda = default_lambda(in, sys.alpha0, &d.mu_bar);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("lcsa.lambda: ") + e.what());
    }
    d.lambda_computed = true;
  }
  in.lambda = d.lambda;
  for (const auto& md : sys.modes) {
    try {
      d.jstar[md.id] = optimal_avg_cost(sys, md);
    } catch (const std::exception& e) {
      throw ConfigError("modes[" + std::to_string(md.id) + "]: optimal cost unavailable: " + e.what());
    }
    if (d.jstar[md.id] > sys.nu_bound)
      throw ConfigError("system.nu_bound: below the optimal average cost " + std::to_string(d.jstar[md.id]) +
                        " of mode " + std::to_string(md.id));
  }
  d.bound = theoretical_bound(in);
  return d;
}

ConfidenceEllipsoid initial_ellipsoid(const ExperimentConfig& cfg, const DerivedParams& d,
                                      unsigned long long seed, long* warmup_steps) {
  const auto& sys = cfg.system;
  const int n = sys.n(), m = sys.m();
  ConfidenceEllipsoid e;
  if (warmup_steps) *warmup_steps = 0;
  if (cfg.initial_source == "perturbed_truth") {
    const NoiseModel noise{NoiseKind::kGaussian, 1.0, seed};
    const VectorXd u = sample_noise(noise, kInitialPerturbation, 0, (n + m) * n, 1.0);
    const MatrixXd U = Eigen::Map<const MatrixXd>(u.data(), n + m, n);
    e.center = stack_theta(sys.A, sys.B) + 0.5 * cfg.epsilon * U / U.norm();
    e.shape = d.lambda * MatrixXd::Identity(n + m, n + m);
    e.dim_d = m;
  } else {
    WarmupConfig wc;
    wc.K0 = cfg.warmup.K0 ? *cfg.warmup.K0 : riccati_oracle(stack_theta(sys.A, sys.B), sys.Q, sys.R, sys.sigma_w).K;
    wc.kappa0 = cfg.warmup.kappa0;
    wc.gamma0 = cfg.warmup.gamma0;
    wc.C0 = cfg.warmup.C0;
    wc.eps0 = cfg.warmup.eps0;
    wc.T0 = cfg.warmup.T0;
    const WarmupResult wr = run_warmup(sys, wc, cfg.warmup.delta.value_or(cfg.delta), seed);
    e = wr.central;
    if (warmup_steps) *warmup_steps = wr.T0;
  }
  if (cfg.r0_rule == "lambda_eps2") e.radius = d.lambda * cfg.epsilon * cfg.epsilon;
  else if (cfg.r0_rule == "fixed") e.radius = *cfg.r0;
  return e;
}

SeedResult run_seed(const ExperimentConfig& cfg, const DerivedParams& d, unsigned long long seed,
                    bool lcsa, bool naive) {
  SeedResult res;
  res.seed = seed;
  const auto& sys = cfg.system;
  const ConfidenceEllipsoid init = initial_ellipsoid(cfg, d, seed, &res.warmup_steps);
  LcsaParams p;
  p.horizon = cfg.horizon;
  p.delta = cfg.delta;
  p.lambda = d.lambda;
  p.mu_scale = cfg.mu_scale;
  p.sdp_tol = cfg.solver_tol;
  p.upsilon_bar = d.upsilon_bar;
  if (!cfg.x0.empty()) p.x0 = Eigen::Map<const VectorXd>(cfg.x0.data(), cfg.x0.size());
  const GoodEventParams gp{d.kappa_star, d.gamma_star, d.chi, d.upsilon_bar};
  const std::string hash = config_hash(cfg);
  auto finish = [&](TrajectoryLog log) {
    log.meta.r0_rule = cfg.r0_rule;
    log.meta.mu_bar = d.mu_bar;
    log.meta.upsilon_bar = d.upsilon_bar;
    log.meta.tau_mad = d.tau_mad;
    log.meta.config_hash = hash;
    StrategyRun run;
    run.regret = regret_curve(log, d.jstar);
    run.event = good_event_check(log, gp);
    run.log = std::move(log);
    return run;
  };
  if (lcsa) res.lcsa = finish(run_lcsa(sys, cfg.schedule, init, p, seed));
  if (naive) res.naive = finish(run_naive_baseline(sys, cfg.schedule, init, p, seed));
  return res;
}

CurveStats curve_stats(const std::vector<const std::vector<double>*>& curves) {
  CurveStats st;
  if (curves.empty()) return st;
  const size_t N = curves.front()->size();
  st.mean.assign(N, 0.0);
  st.min.assign(N, std::numeric_limits<double>::infinity());
  st.max.assign(N, -std::numeric_limits<double>::infinity());
  for (const auto* c : curves) {
    if (c->size() != N) throw std::invalid_argument("curve_stats: curves differ in length");
    for (size_t k = 0; k < N; ++k) {
      st.mean[k] += (*c)[k];
      st.min[k] = std::min(st.min[k], (*c)[k]);
      st.max[k] = std::max(st.max[k], (*c)[k]);
    }
  }
  for (double& v : st.mean) v /= static_cast<double>(curves.size());
  return st;
}

double sublinearity_ratio(const std::vector<double>& cum) {
  const size_t N = cum.size();
  if (N < 2) throw std::invalid_argument("sublinearity_ratio: need at least two points");
  const size_t h = N / 2;
  double a = 0.0, b = 0.0;
  for (size_t k = 0; k < h; ++k) a += cum[k] / std::sqrt(static_cast<double>(k + 1));
  for (size_t k = h; k < N; ++k) b += cum[k] / std::sqrt(static_cast<double>(k + 1));
  a /= static_cast<double>(h);
  b /= static_cast<double>(N - h);
  return b / a;
}

namespace {

std::string summary_text(const ExperimentConfig& cfg, const ExperimentSummary& s, const RunOptions& opts) {
  std::ostringstream o;
  const auto& d = s.derived;
  auto stats = [&](const char* label, auto pick) {
    std::vector<double> v;
    for (const auto& r : s.seeds)
      if (const auto& run = pick(r); run) v.push_back(run->regret.cumulative.back());
    if (v.empty()) return;
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
    o << label << " final cumulative regret: mean " << format_double(mean) << ", std " << format_double(sd)
      << ", 95% band +-" << format_double(1.96 * sd / std::sqrt(static_cast<double>(v.size()))) << '\n';
  };
  o << "experiment " << cfg.name << " (config " << s.config_hash << ")\n";
  o << "horizon " << cfg.horizon << ", seeds " << s.seeds.size() << ", switches";
  for (const auto& ev : cfg.schedule.events) o << ' ' << ev.time << ":" << ev.mode_id;
  o << '\n';
  o << "lambda " << format_double(d.lambda) << (d.lambda_computed ? " (computed)" : " (configured)")
    << ", mu_scale " << format_double(cfg.mu_scale) << ", mu_bar " << format_double(d.mu_bar) << '\n';
  o << "kappa* " << format_double(d.kappa_star) << ", gamma* " << format_double(d.gamma_star) << ", chi "
    << format_double(d.chi) << ", tau_MAD " << d.tau_mad
    << ((cfg.madt_enforce && opts.madt_check) ? " (enforced)" : " (not enforced)") << '\n';
  o << "upsilon_bar " << format_double(d.upsilon_bar) << '\n';
  for (const auto& [id, j] : d.jstar) o << "J*[mode " << id << "] " << format_double(j) << '\n';
  o << "theoretical bound " << format_double(d.bound.total) << " (R1 " << format_double(d.bound.r1) << ", R2 "
    << format_double(d.bound.r2) << ", R3 " << format_double(d.bound.r3) << ", R4 " << format_double(d.bound.r4)
    << ")\n";
  stats("lcsa", [](const SeedResult& r) -> const std::optional<StrategyRun>& { return r.lcsa; });
  stats("naive", [](const SeedResult& r) -> const std::optional<StrategyRun>& { return r.naive; });
  if (opts.lcsa && opts.naive)
    o << "seeds with lcsa <= naive at T: " << format_double(100.0 * s.ordering_fraction) << "%\n";
  if (!s.lcsa.mean.empty()) o << "lcsa R_t/sqrt(t) second/first half: " << format_double(s.sublinearity_lcsa) << '\n';
  if (!s.naive.mean.empty())
    o << "naive R_t/sqrt(t) second/first half: " << format_double(s.sublinearity_naive) << '\n';
  o << "max closed-loop spectral radius " << format_double(s.max_rho) << ", unstable policies "
    << s.unstable_policies << '\n';
  o << "state-bound violations " << s.state_bound_violations << ", good-event violations "
    << s.good_event_violations << ", SDP fallbacks " << s.fallbacks << '\n';
  for (const auto& r : s.seeds)
    if (!r.error.empty()) o << "seed " << r.seed << " aborted: " << r.error << '\n';
  return o.str();
}

std::string metadata_json(const ExperimentConfig& cfg, const ExperimentSummary& s) {
  const auto& d = s.derived;
  json j;
  j["config_hash"] = s.config_hash;
  j["csv_schema_version"] = kCsvSchemaVersion;
  j["lambda"] = d.lambda;
  j["lambda_computed"] = d.lambda_computed;
  j["mu_scale"] = cfg.mu_scale;
  j["mu_bar"] = d.mu_bar;
  j["upsilon_bar"] = d.upsilon_bar;
  j["kappa_star"] = d.kappa_star;
  j["gamma_star"] = d.gamma_star;
  j["chi"] = d.chi;
  j["tau_mad"] = d.tau_mad;
  j["r4_prefactor"] = cfg.r4_prefactor;
  j["theoretical_bound"] = {{"total", d.bound.total}, {"r1", d.bound.r1}, {"r2", d.bound.r2},
                            {"r3", d.bound.r3},       {"r4", d.bound.r4}, {"n_ts", d.bound.n_ts},
                            {"x_bound", d.bound.x_bound}, {"rbar", d.bound.rbar}};
  json js = json::object();
  for (const auto& [id, v] : d.jstar) js[std::to_string(id)] = v;
  j["jstar"] = js;
  json seeds = json::array();
  for (const auto& r : s.seeds) {
    json e = {{"seed", r.seed}, {"warmup_steps", r.warmup_steps}};
    if (r.lcsa) e["lcsa_final_regret"] = r.lcsa->regret.cumulative.back();
    if (r.naive) e["naive_final_regret"] = r.naive->regret.cumulative.back();
    if (r.lcsa) e["lcsa_policy_updates"] = r.lcsa->log.policies.size();
    if (r.naive) e["naive_policy_updates"] = r.naive->log.policies.size();
    if (!r.error.empty()) e["error"] = r.error;
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  return j.dump(2) + "\n";
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg_in, const std::filesystem::path& out,
                                 const RunOptions& opts) {
  ExperimentConfig cfg = cfg_in;
  if (!opts.madt_check) cfg.madt_enforce = false;
  if (opts.n_seeds) {
    if (*opts.n_seeds < 1) throw ConfigError("--seeds: must be positive");
    cfg.seeds.clear();
    for (int k = 1; k <= *opts.n_seeds; ++k) cfg.seeds.push_back(k);
  }
  validate_config(cfg);
  ExperimentSummary s;
  s.derived = derive_params(cfg);
  s.config_hash = config_hash(cfg);
  const auto& d = s.derived;

  const size_t ns = cfg.seeds.size();
  s.seeds.resize(ns);
  std::atomic<size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t workers = std::min<size_t>(ns, cfg.threads > 0 ? cfg.threads : hw);
  auto work = [&] {
    for (size_t k; (k = next.fetch_add(1)) < ns;) {
      try {
        s.seeds[k] = run_seed(cfg, d, cfg.seeds[k], opts.lcsa, opts.naive);
      } catch (const std::exception& e) {
        s.seeds[k].seed = cfg.seeds[k];
        s.seeds[k].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // Aggregates over completed seeds.
  std::vector<const std::vector<double>*> lc, nv;
  long both = 0, ordered = 0;
  const MadtParams madt = madt_params(d);
  const double T = static_cast<double>(std::max<long>(cfg.horizon, 2));
  for (const auto& r : s.seeds) {
    if (!r.error.empty()) continue;
    if (r.lcsa) lc.push_back(&r.lcsa->regret.cumulative);
    if (r.naive) nv.push_back(&r.naive->regret.cumulative);
    if (r.lcsa && r.naive) {
      ++both;
      if (r.lcsa->regret.cumulative.back() <= r.naive->regret.cumulative.back()) ++ordered;
    }
    for (const auto* run : {&r.lcsa, &r.naive}) {
      if (!*run) continue;
      const auto& log = (*run)->log;
      for (const auto& p : log.policies) {
        s.max_rho = std::max(s.max_rho, p.rho_true);
        if (!(p.rho_true < 1.0)) ++s.unstable_policies;
        if (p.fallback) ++s.fallbacks;
      }
      const double x0 = log.steps.empty() ? 0.0 : log.steps.front().x.norm();
      for (const auto& st : log.steps)
        if (st.x.norm() > switched_state_bound(madt, x0, static_cast<double>(st.t), cfg.system.sigma_w,
                                               cfg.system.n(), T, cfg.delta))
          ++s.state_bound_violations;
      s.good_event_violations += (*run)->event.violations;
    }
  }
  s.ordering_fraction = both > 0 ? static_cast<double>(ordered) / both : 0.0;
  s.lcsa = curve_stats(lc);
  s.naive = curve_stats(nv);
  if (s.lcsa.mean.size() >= 2) s.sublinearity_lcsa = sublinearity_ratio(s.lcsa.mean);
  if (s.naive.mean.size() >= 2) s.sublinearity_naive = sublinearity_ratio(s.naive.mean);

  if (!out.empty()) {
    std::filesystem::create_directories(out / "runs");
    for (const auto& r : s.seeds) {
      if (!r.error.empty()) continue;
      for (const auto* run : {&r.lcsa, &r.naive}) {
        if (!*run) continue;
        const auto name = "seed_" + std::to_string(r.seed) + "_" + (*run)->log.meta.strategy + ".csv";
        write_text(out / "runs" / name, format_run_csv((*run)->log, (*run)->regret, (*run)->event.holds));
      }
    }
    AggregateColumns agg{s.lcsa.mean, s.lcsa.min, s.lcsa.max, s.naive.mean, s.naive.min, s.naive.max};
    write_text(out / "aggregate.csv", format_aggregate_csv(agg));
    std::vector<SvgCurve> curves;
    if (!s.lcsa.mean.empty()) curves.push_back({"projection (lcsa)", "#1f77b4", s.lcsa.mean});
    if (!s.naive.mean.empty()) curves.push_back({"naive restart", "#d62728", s.naive.mean});
    std::vector<long> sw;
    for (const auto& ev : cfg.schedule.events) sw.push_back(ev.time);
    write_text(out / "regret.svg",
               render_svg(curves, sw, cfg.name + ": mean cumulative regret over " + std::to_string(lc.size() + 0) +
                                          " seeds"));
    write_text(out / "summary.txt", summary_text(cfg, s, opts));
    write_text(out / "metadata.json", metadata_json(cfg, s));
    write_text(out / "config.json", write_config(cfg));
  }
  for (const auto& r : s.seeds)
    if (!r.error.empty()) throw RunAbort("seed " + std::to_string(r.seed) + ": " + r.error);
  if (!opts.keep_logs)
    for (auto& r : s.seeds) {
      for (auto* run : {&r.lcsa, &r.naive})
        if (*run) (*run)->log.steps.clear(), (*run)->log.steps.shrink_to_fit();
    }
  return s;
}

}  // namespace lcsw
