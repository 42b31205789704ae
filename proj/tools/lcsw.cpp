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

// Command line front end: run, validate, bound.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lcsw/experiment.hpp"
#include "lcsw/report_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

void print_derived(const lcsw::ExperimentConfig& cfg, const lcsw::DerivedParams& d) {
  using lcsw::format_double;
  std::cout << "config " << cfg.name << " (" << lcsw::config_hash(cfg) << ") is valid\n"
            << "  kappa* " << format_double(d.kappa_star) << ", gamma* " << format_double(d.gamma_star)
            << ", chi " << format_double(d.chi) << ", tau_MAD " << d.tau_mad
            << (cfg.madt_enforce ? " (enforced)" : " (not enforced)") << "\n"
            << "  lambda " << format_double(d.lambda) << (d.lambda_computed ? " (computed)" : " (configured)")
            << ", mu_bar " << format_double(d.mu_bar) << ", upsilon_bar " << format_double(d.upsilon_bar) << "\n";
  for (const auto& [id, j] : d.jstar) std::cout << "  J*[mode " << id << "] " << format_double(j) << "\n";
}

lcsw::ExperimentConfig read_unvalidated(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw lcsw::ConfigError("cannot read config " + path);
  return lcsw::parse_config(std::string(std::istreambuf_iterator<char>(f), {}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-based control of linear systems with switching actuators"};
  app.require_subcommand(1);

  std::string run_cfg, out_dir = "out", strategy = "both";
  std::optional<int> n_seeds;
  bool no_madt = false;
  auto* run = app.add_subcommand("run", "Run paired Monte-Carlo experiments and write artifacts");
  run->add_option("config", run_cfg, "Experiment configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seeds", n_seeds, "Use seeds 1..N instead of the configured list");
  run->add_option("--strategy", strategy, "Strategies to run")
      ->check(CLI::IsMember({"lcsa", "naive", "both"}));
  run->add_flag("--no-madt-check", no_madt, "Do not enforce the minimum average dwell time");

  std::string val_cfg;
  auto* validate = app.add_subcommand("validate", "Validate a configuration and print derived constants");
  validate->add_option("config", val_cfg, "Experiment configuration (JSON)")->required();

  std::string bound_cfg;
  auto* bound = app.add_subcommand("bound", "Print the closed-form regret bound for a configuration");
  bound->add_option("config", bound_cfg, "Experiment configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*validate) {
      const auto cfg = lcsw::load_config(val_cfg);
      print_derived(cfg, lcsw::derive_params(cfg));
      return kOk;
    }
    if (*bound) {
      auto cfg = read_unvalidated(bound_cfg);
      cfg.madt_enforce = false;  // the bound does not depend on the schedule gaps
      lcsw::validate_config(cfg);
      const auto d = lcsw::derive_params(cfg);
      const auto& b = d.bound;
      using lcsw::format_double;
      std::cout << format_double(b.total) << "\n"
                << "  R1 " << format_double(b.r1) << "\n  R2 " << format_double(b.r2) << "\n  R3 "
                << format_double(b.r3) << "\n  R4 " << format_double(b.r4) << "\n  N_ts " << format_double(b.n_ts)
                << "\n  X " << format_double(b.x_bound) << "\n  rbar " << format_double(b.rbar)
                << "\n  upsilon_bar " << format_double(b.upsilon_bar) << "\n";
      return kOk;
    }
    // run_experiment validates after applying the command line overrides.
    const auto cfg = read_unvalidated(run_cfg);
    lcsw::RunOptions opts;
    opts.lcsa = strategy != "naive";
    opts.naive = strategy != "lcsa";
    opts.n_seeds = n_seeds;
    opts.madt_check = !no_madt;
    opts.keep_logs = false;
    const auto s = lcsw::run_experiment(cfg, out_dir, opts);
    std::cout << "wrote " << out_dir << " (" << s.seeds.size() << " seeds)\n";
    std::ifstream summary(std::filesystem::path(out_dir) / "summary.txt");
    std::cout << summary.rdbuf();
    return kOk;
  } catch (const lcsw::ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kRuntime;
  }
}
