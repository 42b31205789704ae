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

// Knowledge transfer between actuating modes: projection of the central
// ellipsoid, input augmentation and the log-det ratio diagnostic.

#pragma once

#include <vector>

#include "lcsw/estimation.hpp"
#include "lcsw/model.hpp"

namespace lcsw {

struct Projection {
  ConfidenceEllipsoid ellipsoid;
  // rows[k] is the row of the central parameter matrix that became row k;
  // kept rows first, then the removed actuator rows.
  std::vector<int> rows;
};

// Schur-complement projection of an (n + m)-row central ellipsoid onto the
// parameter space of `mode`.
Projection project_to_mode(const ConfidenceEllipsoid& central, const Mode& mode);

VectorXd augment_input(const VectorXd& u_i, const Mode& mode, int m);

struct LogdetRatio {
  double ratio = 0.0;
  double bound = 0.0;
  bool ok = true;
};

LogdetRatio logdet_ratio_check(const MatrixXd& central_shape, const MatrixXd& projected_shape,
                               int m, double upsilon_bar, double t);

}  // namespace lcsw
