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

// Experiment configuration and the paired Monte-Carlo driver.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsw/control.hpp"
#include "lcsw/model.hpp"
#include "lcsw/regret.hpp"
#include "lcsw/trajectory.hpp"

namespace lcsw {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WarmupSpec {
  std::optional<MatrixXd> K0;  // absent: Riccati gain of mode 1
  double kappa0 = 1.0;
  double gamma0 = 0.5;
  double C0 = 1.0;
  double eps0 = 1.0;
  std::optional<long> T0;
  std::optional<double> delta;  // absent: the experiment delta
  bool operator==(const WarmupSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  LinearSwitchedSystem system;
  SwitchSchedule schedule;
  long horizon = 0;
  double delta = 0.1;
  double epsilon = 0.0;
  std::string initial_source = "warmup";  // "warmup" | "perturbed_truth"
  std::string r0_rule = "warmup";         // "warmup" | "lambda_eps2" | "fixed"
  std::optional<double> r0;
  WarmupSpec warmup;
  std::optional<double> lambda;  // absent: lambda = 4 nu mu_bar / (alpha0 sigma^2)
  double mu_scale = 1.0;
  std::optional<double> chi;     // absent: gamma* / 4
  std::string gamma_star_rule = "squared";  // "squared": 1/(2 kappa*^2), "linear": 1/(2 kappa*)
  bool madt_enforce = true;
  std::string r4_prefactor = "both";  // reported R4 prefactor: "4nu" | "8nu" | "both"
  std::vector<double> x0;
  double solver_tol = 1e-7;
  std::vector<unsigned long long> seeds{1};
  int threads = 0;  // 0: hardware concurrency
  bool operator==(const ExperimentConfig& o) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string write_config(const ExperimentConfig& cfg);
// Throws ConfigError naming the offending field.
void validate_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Constants derived from a validated configuration.
struct DerivedParams {
  double kappa_star = 0.0;
  double gamma_star = 0.0;
  double chi = 0.0;
  long tau_mad = 0;
  double upsilon_bar = 0.0;
  double lambda = 0.0;
  bool lambda_computed = false;
  double mu_bar = 0.0;
  std::map<int, double> jstar;
  BoundTerms bound;
};

DerivedParams derive_params(const ExperimentConfig& cfg);
MadtParams madt_params(const DerivedParams& d);
BoundInputs bound_inputs(const ExperimentConfig& cfg, const DerivedParams& d);

// Initial central ellipsoid for one seed (warm-up or perturbed truth).
ConfidenceEllipsoid initial_ellipsoid(const ExperimentConfig& cfg, const DerivedParams& d,
                                      unsigned long long seed, long* warmup_steps = nullptr);

struct StrategyRun {
  TrajectoryLog log;
  RegretReport regret;
  GoodEvent event;
};

struct SeedResult {
  unsigned long long seed = 0;
  long warmup_steps = 0;
  std::optional<StrategyRun> lcsa;
  std::optional<StrategyRun> naive;
  std::string error;  // non-empty when the seed aborted
};

SeedResult run_seed(const ExperimentConfig& cfg, const DerivedParams& d, unsigned long long seed,
                    bool lcsa, bool naive);

struct RunOptions {
  bool lcsa = true;
  bool naive = true;
  std::optional<int> n_seeds;  // overrides the config seed list with 1..N
  bool madt_check = true;      // false: skip MADT enforcement
  bool keep_logs = true;       // keep full logs in the returned results
};

struct CurveStats {
  std::vector<double> mean, min, max;
};

struct ExperimentSummary {
  DerivedParams derived;
  std::string config_hash;
  std::vector<SeedResult> seeds;
  CurveStats lcsa, naive;
  double ordering_fraction = 0.0;  // seeds with final lcsa <= naive
  double sublinearity_lcsa = 0.0;  // second-half / first-half mean of R_t / sqrt(t)
  double sublinearity_naive = 0.0;
  double max_rho = 0.0;
  long unstable_policies = 0;
  long state_bound_violations = 0;
  long good_event_violations = 0;
  long fallbacks = 0;
};

CurveStats curve_stats(const std::vector<const std::vector<double>*>& curves);
// Mean of R_t / sqrt(t) over the second half of the horizon divided by the
// same mean over the first half (t counted from 1).
double sublinearity_ratio(const std::vector<double>& cumulative);

// Runs every seed on a bounded worker pool; writes artifacts when `out` is
// non-empty. Aborted seeds are reported and then rethrown as RunAbort after
// all artifacts of completed seeds are written.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                 const RunOptions& opts = {});

}  // namespace lcsw
