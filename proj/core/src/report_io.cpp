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

#include "lcsw/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace lcsw {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_run_csv(const TrajectoryLog& log, const RegretReport& regret,
                           const std::vector<bool>& good_event) {
  const size_t N = log.steps.size();
  if (regret.instantaneous.size() != N || regret.cumulative.size() != N || good_event.size() != N)
    throw std::invalid_argument("format_run_csv: column length mismatch");
  std::string out = kRunCsvHeader;
  out += '\n';
  for (size_t k = 0; k < N; ++k) {
    const auto& s = log.steps[k];
    out += std::to_string(s.t) + ',' + std::to_string(s.mode_id) + ',' + std::to_string(s.epoch) + ',' +
           format_double(s.x.norm()) + ',' + format_double(s.cost) + ',' +
           format_double(regret.jstar.at(s.mode_id)) + ',' + format_double(regret.instantaneous[k]) + ',' +
           format_double(regret.cumulative[k]) + ',' + (s.policy_update ? "1" : "0") + ',' +
           format_double(s.logdet_v) + ',' + format_double(s.mu) + ',' + s.sdp_status + ',' +
           (good_event[k] ? "1" : "0") + '\n';
  }
  return out;
}

std::string format_aggregate_csv(const AggregateColumns& a) {
  const size_t N = std::max(a.lcsa_mean.size(), a.naive_mean.size());
  auto cell = [](const std::vector<double>& v, size_t k) {
    return k < v.size() ? format_double(v[k]) : std::string();
  };
  std::string out = kAggregateCsvHeader;
  out += '\n';
  for (size_t k = 0; k < N; ++k) {
    out += std::to_string(k) + ',' + cell(a.lcsa_mean, k) + ',' + cell(a.lcsa_min, k) + ',' + cell(a.lcsa_max, k) +
           ',' + cell(a.naive_mean, k) + ',' + cell(a.naive_min, k) + ',' + cell(a.naive_max, k) + '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw OutputError("write failed for " + path.string());
}

double SvgAxes::px(double x) const {
  const double span = x_max > x_min ? x_max - x_min : 1.0;
  return left + (x - x_min) / span * (width - left - right);
}

double SvgAxes::py(double y) const {
  const double span = y_max > y_min ? y_max - y_min : 1.0;
  return height - bottom - (y - y_min) / span * (height - top - bottom);
}

SvgAxes fit_axes(const std::vector<SvgCurve>& curves) {
  SvgAxes ax;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  size_t len = 0;
  for (const auto& c : curves) {
    len = std::max(len, c.y.size());
    for (double v : c.y)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi == lo) hi = lo + 1.0;
  ax.x_min = 0.0;
  ax.x_max = len > 1 ? static_cast<double>(len - 1) : 1.0;
  ax.y_min = std::min(lo, 0.0);
  ax.y_max = hi;
  return ax;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<SvgCurve>& curves, const std::vector<long>& switch_times,
                       const std::string& title) {
  const SvgAxes ax = fit_axes(curves);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << ax.width << "\" height=\"" << ax.height
    << "\" viewBox=\"0 0 " << ax.width << ' ' << ax.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << ax.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  const double x0 = ax.px(ax.x_min), x1 = ax.px(ax.x_max), y0 = ax.py(ax.y_min), y1 = ax.py(ax.y_max);
  s << "<g stroke=\"black\" stroke-width=\"1\">"
    << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\"/>"
    << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\"/></g>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = ax.x_min + (ax.x_max - ax.x_min) * k / 4.0;
    const double yv = ax.y_min + (ax.y_max - ax.y_min) * k / 4.0;
    s << "<text x=\"" << ax.px(xv) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    s << "<text x=\"" << x0 - 6 << "\" y=\"" << ax.py(yv) + 4 << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  s << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << ax.height - 10 << "\" text-anchor=\"middle\">t</text>\n";
  s << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (y0 + y1) / 2 << ")\">mean cumulative regret</text>\n";
  for (long ts : switch_times) {
    if (ts <= 0) continue;
    const double x = ax.px(static_cast<double>(ts));
    s << "<line class=\"switch\" data-t=\"" << ts << "\" x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x
      << "\" y2=\"" << y1 << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (size_t c = 0; c < curves.size(); ++c) {
    s << "<polyline class=\"curve\" data-label=\"" << escape(curves[c].label) << "\" fill=\"none\" stroke=\""
      << escape(curves[c].color) << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < curves[c].y.size(); ++k) {
      if (k) s << ' ';
      s << format_double(ax.px(static_cast<double>(k))) << ',' << format_double(ax.py(curves[c].y[k]));
    }
    s << "\"/>\n";
    const double ly = ax.top + 16 + 16 * static_cast<double>(c);
    s << "<line x1=\"" << x0 + 10 << "\" y1=\"" << ly << "\" x2=\"" << x0 + 30 << "\" y2=\"" << ly << "\" stroke=\""
      << escape(curves[c].color) << "\" stroke-width=\"2\"/><text x=\"" << x0 + 36 << "\" y=\"" << ly + 4 << "\">"
      << escape(curves[c].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace lcsw
