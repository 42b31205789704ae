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

#include "lcsw/ellipsoid.hpp"

#include <cmath>
#include <stdexcept>

namespace lcsw {

Projection project_to_mode(const ConfidenceEllipsoid& central, const Mode& mode) {
  const int p = static_cast<int>(central.shape.rows());
  const int n = static_cast<int>(central.center.cols());
  const int m = p - n;
  if (central.dim_d != m || central.center.rows() != p)
    throw std::invalid_argument("project_to_mode: central ellipsoid must cover all actuators");
  for (int a : mode.actuators)
    if (a < 1 || a > m) throw std::invalid_argument("project_to_mode: invalid actuator index");

  Projection out;
  std::vector<bool> kept(p, false);
  for (int i = 0; i < n; ++i) {
    out.rows.push_back(i);
    kept[i] = true;
  }
  for (int a : mode.actuators) {
    out.rows.push_back(n + a - 1);
    kept[n + a - 1] = true;
  }
  const int k = static_cast<int>(out.rows.size());
  for (int i = 0; i < p; ++i)
    if (!kept[i]) out.rows.push_back(i);

  const MatrixXd Vt = central.shape(out.rows, out.rows);

  const MatrixXd U = Vt.topLeftCorner(k, k);
  auto& e = out.ellipsoid;
  if (k == p) {
    e.shape = U;
  } else {
    const MatrixXd M = Vt.bottomLeftCorner(p - k, k);
    const MatrixXd T = Vt.bottomRightCorner(p - k, p - k);
    Eigen::LLT<MatrixXd> llt(T);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("project_to_mode: removed block is singular");
    e.shape = U - M.transpose() * llt.solve(M);
    e.shape = 0.5 * (e.shape + e.shape.transpose());
  }
  e.center.resize(k, n);
  for (int i = 0; i < k; ++i) e.center.row(i) = central.center.row(out.rows[i]);
  e.radius = central.radius;
  e.dim_d = mode.dim();
  return out;
}

VectorXd augment_input(const VectorXd& u_i, const Mode& mode, int m) {
  if (u_i.size() != mode.dim()) throw std::invalid_argument("augment_input: length mismatch");
  VectorXd u = VectorXd::Zero(m);
  for (int j = 0; j < mode.dim(); ++j) {
    const int a = mode.actuators[j];
    if (a < 1 || a > m) throw std::invalid_argument("augment_input: invalid actuator index");
    u(a - 1) = u_i(j);
  }
  return u;
}

LogdetRatio logdet_ratio_check(const MatrixXd& central_shape, const MatrixXd& projected_shape,
                               int m, double upsilon_bar, double t) {
  LogdetRatio r;
  r.ratio = log_det_spd(central_shape) - log_det_spd(projected_shape);
  r.bound = (m - 1) * std::log((1.0 + 2.0 * upsilon_bar) * t);
  r.ok = r.ratio <= r.bound;
  return r;
}

}  // namespace lcsw
