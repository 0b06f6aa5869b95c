// Copyright 2026 The dnehb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "dnehb/cournot.hpp"
#include "dnehb/diagnostics.hpp"
#include "dnehb/errors.hpp"
#include "dnehb/gain.hpp"
#include "dnehb/network.hpp"
#include "dnehb/solver.hpp"
#include "test_util.hpp"

using namespace dnehb;
using dnehb::testing::random_matrix;
using dnehb::testing::random_stochastic;
using dnehb::testing::random_vector;
using dnehb::testing::small_cournot;

TEST_CASE("weighted norm examples") {
  RowMatrix u(2, 2);
  u << 3.0, 4.0, 3.0, 4.0;
  CHECK(weighted_norm(u, Vector::Constant(2, 0.5)) == doctest::Approx(5.0));
  CHECK(weighted_norm(RowMatrix::Zero(3, 2), Vector::Constant(3, 1.0 / 3.0)) == 0.0);
  CHECK_THROWS_AS(weighted_norm(u, (Vector(2) << 1.0, 0.0).finished()), InputError);
  CHECK_THROWS_AS(weighted_norm(u, Vector::Constant(3, 1.0 / 3.0)), InputError);
}

TEST_CASE("weighted norm is equivalent to the plain norm") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<Eigen::Index>(2 + rng.index(6));
    const RowMatrix u = random_matrix(rng, m, 4);
    const Vector pi = random_stochastic(rng, m);
    const double wn = weighted_norm(u, pi);
    CHECK(wn / std::sqrt(pi.maxCoeff()) <= u.norm() * (1.0 + 1e-12));
    CHECK(u.norm() <= wn / std::sqrt(pi.minCoeff()) * (1.0 + 1e-12));
  }
}

TEST_CASE("Lyapunov vector of consensual states") {
  const Vector x = (Vector(3) << 1.0, 2.0, -1.0).finished();
  const Vector pi = Vector::Constant(4, 0.25);
  SolverState at_ne{0, Vector::Ones(4) * x.transpose(), Vector::Ones(4) * x.transpose()};
  const LyapunovVector v0 = lyapunov(at_ne, pi, x);
  CHECK(v0.v1 == 0.0);
  CHECK(v0.v2 == 0.0);
  CHECK(v0.v3 == 0.0);

  const Vector y = (Vector(3) << 0.0, 4.0, -1.0).finished();
  SolverState other{0, Vector::Ones(4) * y.transpose(), Vector::Ones(4) * y.transpose()};
  const LyapunovVector v1 = lyapunov(other, pi, x);
  CHECK(v1.v1 == doctest::Approx(0.0));
  CHECK(v1.v2 == doctest::Approx((y - x).norm()));
  CHECK_THROWS_AS(lyapunov(other, pi, Vector::Zero(2)), InputError);
}

TEST_CASE("Lyapunov components decompose the weighted distance") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const RowMatrix z = random_matrix(rng, 3, 4);
    const Vector pi = random_stochastic(rng, 3);
    const Vector x = random_vector(rng, 4);
    const LyapunovVector v = lyapunov(SolverState{0, z, z}, pi, x);
    const double total = std::pow(weighted_norm(z.rowwise() - x.transpose(), pi), 2);
    CHECK(std::abs(total - v.v1 * v.v1 - v.v2 * v.v2) <= 1e-10 * std::max(1.0, total));
  }
}

TEST_CASE("consensus error examples") {
  RowMatrix a(2, 2);
  a << 0.0, 0.0, 1.0, 3.0;
  CHECK(consensus_error(a) == 3.0);
  RowMatrix b(3, 2);
  b << 1.0, 2.0, 2.0, 2.0, 1.0, 5.0;
  CHECK(consensus_error(b) == 3.0);
  CHECK(consensus_error(RowMatrix::Ones(4, 3)) == 0.0);
  CHECK_THROWS_AS(consensus_error(RowMatrix::Ones(1, 3)), InputError);
}

TEST_CASE("consensus error and v1 vanish together") {
  Rng rng(1);
  const Vector pi = random_stochastic(rng, 3);
  const RowMatrix z = random_matrix(rng, 3, 2);
  CHECK(consensus_error(z) > 0.0);
  CHECK(lyapunov(SolverState{0, z, z}, pi, Vector::Zero(2)).v1 > 0.0);
}

TEST_CASE("rate fit") {
  std::vector<double> geometric, constant;
  for (int k = 0; k < 100; ++k) {
    geometric.push_back(std::pow(0.9, k));
    constant.push_back(2.5);
  }
  CHECK(fit_rate(geometric) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(fit_rate(constant) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate(std::vector<double>(29, 1.0)), InputError);
  std::vector<double> bad = constant;
  bad[40] = 0.0;
  CHECK_THROWS_AS(fit_rate(bad), InputError);
}

TEST_CASE("rate fit skips values at machine precision") {
  std::vector<double> s;
  for (int k = 0; k < 60; ++k) s.push_back(std::max(std::pow(0.5, k), 1e-20));
  CHECK(fit_rate(s) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("local gain matrices dominate the global one and bounds hold along a run") {
  const CournotInstance inst = small_cournot(4, 2, 4, 3);
  const GameInstance game = make_game(inst);
  const Vector x_star = solve_ne(inst);
  const std::size_t horizon = 120;
  const WeightSchedule ws = build_weights(ScheduleGenerator(4, 0.3, 3), horizon);
  const BoundConstants bc = bound_constants(schedule_constants(ws), game.constants());
  const SolverParams params = suggest_parameters(bc, 4);
  const FeasibilityReport report = validate_parameters(bc, params);
  REQUIRE(report.pass);

  std::vector<SolverState> trace{random_initial_state(game, 3)};
  StepWorkspace work;
  for (std::size_t k = 0; k < horizon; ++k) {
    SolverState next = trace.back();
    advance(next, params, game, ws.weights[k], work);
    trace.push_back(next);
  }
  CheckOptions opts;
  opts.global_gain = report.gain->M;
  const auto checks = check_propositions(trace, ws, game, params, x_star, opts);
  REQUIRE(checks.size() == horizon);
  for (const PropositionCheck& pc : checks) {
    CHECK(pc.pass);
    CHECK(pc.dominated);
    CHECK(pc.decomposition_residual <= 1e-10);
  }
}

TEST_CASE("bounds are ties at the equilibrium") {
  const CournotInstance inst = small_cournot(4, 2, 4, 1);
  const GameInstance game = make_game(inst);
  const Vector x_star = solve_ne(inst);
  const WeightSchedule ws = build_weights(ScheduleGenerator(4, 0.3, 1), 5);
  const RowMatrix z = Vector::Ones(4) * x_star.transpose();
  std::vector<SolverState> trace{SolverState{0, z, z}};
  for (std::size_t k = 0; k < 5; ++k) {
    trace.push_back(step(trace.back(), SolverParams::uniform(4, 0.01, 0.3), game, ws.weights[k]));
  }
  for (const PropositionCheck& pc : check_propositions(trace, ws, game, SolverParams::uniform(4, 0.01, 0.3),
                                                       x_star)) {
    CHECK(pc.pass);
    CHECK(pc.next.v1 <= 1e-12);
    CHECK(pc.next.v2 <= 1e-12);
  }
}

TEST_CASE("misaligned traces are rejected") {
  const CournotInstance inst = small_cournot(4, 2, 4, 1);
  const GameInstance game = make_game(inst);
  const WeightSchedule ws = build_weights(ScheduleGenerator(4, 0.3, 1), 2);
  const SolverState s = random_initial_state(game, 0);
  SolverState t = s;
  t.k = 5;
  const std::vector<SolverState> bad{s, t};
  CHECK_THROWS_AS(check_propositions(bad, ws, game, SolverParams::uniform(4, 0.01, 0.0), solve_ne(inst)),
                  InputError);
  const std::vector<SolverState> too_long(4, s);
  CHECK_THROWS_AS(check_propositions(too_long, ws, game, SolverParams::uniform(4, 0.01, 0.0), solve_ne(inst)),
                  InputError);
}

TEST_CASE("state-difference bound needs the consensus term without momentum") {
  CournotSampling spec;
  spec.firms = 4;
  spec.markets = 2;
  spec.dimension = 4;
  const std::uint64_t seed = 6;
  const CournotInstance inst = sample_cournot(spec, seed);
  const GameInstance game = make_game(inst);
  const WeightSchedule ws = build_weights(ScheduleGenerator(4, 0.3, seed), 9);
  const SolverParams params = SolverParams::uniform(4, 1.70765e-6, 0.0);
  std::vector<SolverState> trace{random_initial_state(game, seed)};
  StepWorkspace work;
  for (std::size_t k = 0; k < 9; ++k) {
    SolverState next = trace.back();
    advance(next, params, game, ws.weights[k], work);
    trace.push_back(std::move(next));
  }
  const auto checks = check_propositions(trace, ws, game, params, solve_ne(inst));
  const PropositionCheck& pc = checks[8];
  CHECK(pc.slack[0] >= 0.0);
  CHECK(pc.slack[1] >= 0.0);
  CHECK(pc.slack[2] < -1e-4);
  CHECK_FALSE(pc.pass);
  for (const PropositionCheck& c : checks) CHECK(c.state_diff_full_slack >= 0.0);
}
