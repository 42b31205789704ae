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

// CSV and SVG emission.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsw/regret.hpp"
#include "lcsw/trajectory.hpp"

namespace lcsw {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kRunCsvHeader =
    "t,mode,epoch,x_norm,cost,jstar,inst_regret,cum_regret,policy_update,logdet_v,mu,sdp_status,good_event";
inline constexpr const char* kAggregateCsvHeader =
    "t,lcsa_mean,lcsa_min,lcsa_max,naive_mean,naive_min,naive_max";

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::string format_run_csv(const TrajectoryLog& log, const RegretReport& regret,
                           const std::vector<bool>& good_event);

struct AggregateColumns {
  std::vector<double> lcsa_mean, lcsa_min, lcsa_max;
  std::vector<double> naive_mean, naive_min, naive_max;  // empty columns print as blanks
};

std::string format_aggregate_csv(const AggregateColumns& agg);

void write_text(const std::filesystem::path& path, const std::string& text);

struct SvgCurve {
  std::string label;
  std::string color;
  std::vector<double> y;  // y[k] plotted at x = k
};

// Affine map from data to pixel coordinates shared by the renderer and tests.
struct SvgAxes {
  double width = 800, height = 480;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  double px(double x) const;
  double py(double y) const;
};

SvgAxes fit_axes(const std::vector<SvgCurve>& curves);
std::string render_svg(const std::vector<SvgCurve>& curves, const std::vector<long>& switch_times,
                       const std::string& title);

}  // namespace lcsw
