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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "lcsw/experiment.hpp"
#include "lcsw/report_io.hpp"

namespace fs = std::filesystem;

namespace lcsw {
namespace {

const fs::path kConfigs = LCSW_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lcsw_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  for (std::string line; std::getline(f, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig small_smoke() {
  auto cfg = load_config(kConfigs / "smoke.json");
  cfg.seeds = {1, 2};
  return cfg;
}

TEST(Config, ReferenceMatricesLoadVerbatim) {
  const auto cfg = load_config(kConfigs / "paper_experiment.json");
  EXPECT_EQ(cfg.system.A(0, 0), 10.4);
  EXPECT_EQ(cfg.system.A(1, 2), 8.3);
  EXPECT_EQ(cfg.system.B(2, 2), -7.2);
  EXPECT_EQ(cfg.system.Q(2, 2), 25.0);
  EXPECT_EQ(cfg.system.R(0, 2), 16.0);
  EXPECT_EQ(cfg.system.sigma_w, 0.003);
  EXPECT_EQ(cfg.horizon, 15000);
  EXPECT_EQ(cfg.system.mode(2).actuators, (std::vector<int>{1, 2}));
  ASSERT_EQ(cfg.schedule.events.size(), 3u);
  EXPECT_EQ(cfg.schedule.events[1], (SwitchEvent{5000, 2}));
  EXPECT_EQ(cfg.seeds.size(), 20u);
}

TEST(Config, RoundTrip) {
  for (const char* name : {"paper_experiment.json", "smoke.json"}) {
    const auto cfg = load_config(kConfigs / name);
    const auto back = parse_config(write_config(cfg));
    EXPECT_TRUE(back == cfg) << name;
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
  auto cfg = load_config(kConfigs / "smoke.json");
  cfg.lambda.reset();
  cfg.chi.reset();
  cfg.warmup.K0.reset();
  cfg.x0 = {0.5, -0.5};
  EXPECT_TRUE(parse_config(write_config(cfg)) == cfg);
}

void expect_config_error(const ExperimentConfig& cfg, const std::string& field) {
  try {
    validate_config(cfg);
    FAIL() << "expected a validation error naming " << field;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

TEST(Config, ValidationErrorsNameTheField) {
  auto cfg = small_smoke();
  cfg.schedule.events[1].time = 60;  // gap below the dwell time
  expect_config_error(cfg, "schedule");
  cfg.madt_enforce = false;
  EXPECT_NO_THROW(validate_config(cfg));

  cfg = small_smoke();
  cfg.system.Q(0, 0) = -1.0;
  expect_config_error(cfg, "system");
  cfg = small_smoke();
  cfg.delta = 1.5;
  expect_config_error(cfg, "delta");
  cfg = small_smoke();
  cfg.system.nu_bound = 1.0;
  expect_config_error(cfg, "nu_bound");
  cfg = small_smoke();
  cfg.r0_rule = "lambda_eps2";
  expect_config_error(cfg, "epsilon");

  EXPECT_THROW(parse_config("{"), ConfigError);
  std::string text = slurp(kConfigs / "smoke.json");
  text = std::regex_replace(text, std::regex("\"horizon\": 450"), "\"horizon\": \"long\"");
  try {
    parse_config(text);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("horizon"), std::string::npos);
  }
}

TEST(Csv, HeaderIsPinned) {
  EXPECT_EQ(kCsvSchemaVersion, 1);
  EXPECT_EQ(std::string(kRunCsvHeader),
            "t,mode,epoch,x_norm,cost,jstar,inst_regret,cum_regret,policy_update,logdet_v,mu,sdp_status,good_event");
  TrajectoryLog empty;
  EXPECT_EQ(format_run_csv(empty, RegretReport{}, {}), std::string(kRunCsvHeader) + "\n");
  TrajectoryLog one;
  StepRecord st;
  st.x = VectorXd::Ones(2);
  st.cost = 3.0;
  one.steps.push_back(st);
  RegretReport rep{{{1, 1.0}}, {2.0}, {2.0}};
  const std::string csv = format_run_csv(one, rep, {true});
  EXPECT_EQ(csv, std::string(kRunCsvHeader) + "\n0,1,0," + format_double(std::sqrt(2.0)) + ",3,1,2,2,0,0,0,none,1\n");
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) EXPECT_EQ(std::stod(format_double(v)), v);
}

class SmokeRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = new fs::path(scratch("smoke_a"));
    summary_ = new ExperimentSummary(run_experiment(small_smoke(), *out_));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*out_);
    delete out_;
    delete summary_;
  }
  static fs::path* out_;
  static ExperimentSummary* summary_;
};
fs::path* SmokeRun::out_ = nullptr;
ExperimentSummary* SmokeRun::summary_ = nullptr;

TEST_F(SmokeRun, WritesAllArtifacts) {
  for (const char* f : {"aggregate.csv", "summary.txt", "metadata.json", "regret.svg", "config.json"})
    EXPECT_TRUE(fs::exists(*out_ / f)) << f;
  for (int seed : {1, 2})
    for (const char* strat : {"lcsa", "naive"}) {
      const auto rows = read_csv(*out_ / "runs" / ("seed_" + std::to_string(seed) + "_" + strat + ".csv"));
      ASSERT_EQ(rows.size(), 451u);
      EXPECT_EQ(rows[0].size(), 13u);
      EXPECT_EQ(rows[1][0], "0");
      EXPECT_EQ(rows[450][0], "449");
    }
  EXPECT_EQ(read_csv(*out_ / "aggregate.csv").size(), 451u);
}

TEST_F(SmokeRun, IsByteIdenticalAcrossInvocations) {
  const fs::path again = scratch("smoke_b");
  run_experiment(small_smoke(), again);
  for (const auto& entry : fs::recursive_directory_iterator(*out_)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), *out_);
    EXPECT_EQ(slurp(entry.path()), slurp(again / rel)) << rel;
  }
  fs::remove_all(again);
}

TEST_F(SmokeRun, AggregateRecomputesFromSeedFiles) {
  const auto agg = read_csv(*out_ / "aggregate.csv");
  const auto a = read_csv(*out_ / "runs" / "seed_1_lcsa.csv");
  const auto b = read_csv(*out_ / "runs" / "seed_2_lcsa.csv");
  for (size_t r = 1; r < agg.size(); ++r) {
    const double x = std::stod(a[r][7]), y = std::stod(b[r][7]);
    EXPECT_NEAR(std::stod(agg[r][1]), (x + y) / 2, 1e-12 * (1 + std::abs(x) + std::abs(y)));
    EXPECT_EQ(std::stod(agg[r][2]), std::min(x, y));
    EXPECT_EQ(std::stod(agg[r][3]), std::max(x, y));
  }
}

TEST_F(SmokeRun, SvgPolylinesMatchAggregate) {
  const std::string svg = slurp(*out_ / "regret.svg");
  EXPECT_EQ(svg.find("href"), std::string::npos);  // self-contained
  const auto agg = read_csv(*out_ / "aggregate.csv");
  std::vector<SvgCurve> curves(2);
  for (size_t r = 1; r < agg.size(); ++r) {
    curves[0].y.push_back(std::stod(agg[r][1]));
    curves[1].y.push_back(std::stod(agg[r][4]));
  }
  const SvgAxes ax = fit_axes(curves);
  const std::regex poly("<polyline class=\"curve\"[^>]*points=\"([^\"]*)\"");
  size_t c = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it, ++c) {
    ASSERT_LT(c, 2u);
    std::stringstream pts((*it)[1].str());
    size_t k = 0;
    for (std::string pair; pts >> pair; ++k) {
      const auto comma = pair.find(',');
      const double px = std::stod(pair.substr(0, comma)), py = std::stod(pair.substr(comma + 1));
      EXPECT_NEAR(px, ax.px(static_cast<double>(k)), 1e-9);
      EXPECT_NEAR(py, ax.py(curves[c].y[k]), 1e-9);
    }
    EXPECT_EQ(k, curves[c].y.size());
  }
  EXPECT_EQ(c, 2u);
  EXPECT_NE(svg.find("data-t=\"150\""), std::string::npos);
  EXPECT_NE(svg.find("data-t=\"300\""), std::string::npos);
}

TEST_F(SmokeRun, SummaryReportsDiagnostics) {
  const std::string s = slurp(*out_ / "summary.txt");
  for (const char* key : {"theoretical bound", "lcsa final cumulative regret", "naive final cumulative regret",
                          "good-event violations", "tau_MAD 106"})
    EXPECT_NE(s.find(key), std::string::npos) << key;
  EXPECT_EQ(summary_->seeds.size(), 2u);
}

TEST(Experiment, OmittedLambdaIsComputedAndEchoed) {
  auto cfg = small_smoke();
  cfg.lambda.reset();
  cfg.seeds = {1};
  cfg.horizon = 40;
  cfg.schedule.events = {{0, 1}};
  cfg.madt_enforce = false;
  const fs::path out = scratch("lambda");
  run_experiment(cfg, out, RunOptions{true, false});
  const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
  const auto d = derive_params(cfg);
  EXPECT_TRUE(d.lambda_computed);
  const double expect = default_lambda(bound_inputs(cfg, d), cfg.system.alpha0);
  EXPECT_EQ(d.lambda, expect);
  EXPECT_EQ(meta.at("lambda").get<double>(), expect);
  EXPECT_TRUE(meta.at("lambda_computed").get<bool>());
  fs::remove_all(out);
}

TEST(Experiment, SublinearityRatio) {
  std::vector<double> sq(100), lin(100);
  for (int t = 0; t < 100; ++t) sq[t] = std::sqrt(t + 1.0), lin[t] = t + 1.0;
  EXPECT_NEAR(sublinearity_ratio(sq), 1.0, 1e-12);
  EXPECT_GT(sublinearity_ratio(lin), 1.5);
}

#ifdef LCSW_TOOL_PATH
int tool(const std::string& args) {
  const int rc = std::system((std::string(LCSW_TOOL_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  EXPECT_EQ(tool("validate " + (kConfigs / "smoke.json").string()), 0);
  EXPECT_EQ(tool("bound " + (kConfigs / "paper_experiment.json").string()), 0);
  EXPECT_EQ(tool("validate " + (dir / "missing.json").string()), 2);
  std::string text = slurp(kConfigs / "smoke.json");
  {
    std::ofstream f(dir / "madt.json");
    f << std::regex_replace(text, std::regex("\"time\": 150"), "\"time\": 60");
  }
  EXPECT_EQ(tool("run " + (dir / "madt.json").string() + " --out " + (dir / "o1").string()), 2);
  EXPECT_EQ(tool("run " + (dir / "madt.json").string() + " --no-madt-check --seeds 1 --strategy lcsa --out " +
                 (dir / "o2").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "o2" / "runs" / "seed_1_lcsa.csv"));
  EXPECT_FALSE(fs::exists(dir / "o2" / "runs" / "seed_1_naive.csv"));
  {
    std::ofstream f(dir / "unstable.json");
    f << std::regex_replace(text, std::regex("\"K0\": \\[\\[-1.1, -0.3\\], \\[-0.2, -0.9\\]\\]"),
                            "\"K0\": [[0.0, 0.0], [0.0, 0.0]]");
  }
  EXPECT_EQ(tool("run " + (dir / "unstable.json").string() + " --seeds 1 --out " + (dir / "o3").string()), 3);
  EXPECT_EQ(tool("run " + (dir / "unstable.json").string() + " --strategy bogus"), 2);
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace lcsw
