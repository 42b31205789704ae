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

#include <benchmark/benchmark.h>

#include "lcsw/control.hpp"
#include "lcsw/ellipsoid.hpp"
#include "lcsw/model.hpp"
#include "lcsw/sdp.hpp"

namespace lcsw {
namespace {

MatrixXd reference_A() {
  MatrixXd A(3, 3);
  A << 10.4, 0, -2.7, 5.2, -8.1, 8.3, 0, 0.4, -9;
  return A;
}

MatrixXd reference_B() {
  MatrixXd B(3, 3);
  B << -4.7, 6.1, -2.9, -5, 5.8, 2.5, 2.9, 0, -7.2;
  return B;
}

SdpProblem reference_problem(double mu) {
  SdpProblem p;
  p.Q = MatrixXd(3, 3);
  p.Q << 6.5, -0.8, -1.4, -0.8, 5.7, 2.6, -1.4, 2.6, 25;
  p.R = MatrixXd(3, 3);
  p.R << 40, 10, 16, 10, 28, 8, 16, 8, 48;
  p.theta = stack_theta(reference_A(), reference_B());
  p.V = 100.0 * MatrixXd::Identity(6, 6);
  p.W = 9e-6 * MatrixXd::Identity(3, 3);
  p.mu = mu;
  return p;
}

void BM_ExactSdp(benchmark::State& state) {
  const auto p = reference_problem(0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact_sdp(p.theta, p.Q, p.R, p.W));
}
BENCHMARK(BM_ExactSdp)->Unit(benchmark::kMillisecond);

void BM_RelaxedSdp(benchmark::State& state) {
  const auto p = reference_problem(1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_relaxed_sdp(p));
}
BENCHMARK(BM_RelaxedSdp)->Unit(benchmark::kMillisecond);

void BM_Riccati(benchmark::State& state) {
  const auto p = reference_problem(0.0);
  for (auto _ : state) benchmark::DoNotOptimize(riccati_oracle(p.theta, p.Q, p.R, 0.003));
}
BENCHMARK(BM_Riccati)->Unit(benchmark::kMicrosecond);

void BM_Projection(benchmark::State& state) {
  ConfidenceEllipsoid e;
  MatrixXd G = MatrixXd::Random(6, 6);
  e.shape = G * G.transpose() + MatrixXd::Identity(6, 6);
  e.center = MatrixXd::Random(6, 3);
  e.radius = 1.0;
  e.dim_d = 3;
  const Mode md = make_mode(2, {1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(project_to_mode(e, md));
}
BENCHMARK(BM_Projection)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace lcsw

BENCHMARK_MAIN();
