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

#include "doctest.h"
#include "dnehb/cournot.hpp"
#include "dnehb/errors.hpp"
#include "dnehb/network.hpp"
#include "dnehb/solver.hpp"
#include "test_util.hpp"

using namespace dnehb;
using dnehb::testing::decoupled_game;
using dnehb::testing::random_matrix;
using dnehb::testing::random_vector;
using dnehb::testing::small_cournot;

TEST_CASE("F_alpha vanishes when every row is the equilibrium") {
  const CournotInstance inst = small_cournot(5, 3, 8, 1);
  const GameInstance game = make_game(inst);
  const Vector x = solve_ne(inst);
  const RowMatrix z = Vector::Ones(5) * x.transpose();
  const RowMatrix f = F_alpha(SolverParams::uniform(5, 0.3, 0.0), game, z);
  CHECK(f.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("F_alpha with one agent is the scaled gradient") {
  const Vector a = (Vector(2) << 1.0, 2.0).finished();
  const GameInstance game = decoupled_game(a, {2});
  RowMatrix z(1, 2);
  z << 3.0, -1.0;
  const RowMatrix f = F_alpha(SolverParams::uniform(1, 0.5, 0.0), game, z);
  CHECK(f(0, 0) == doctest::Approx(0.5 * 2.0 * 2.0));
  CHECK(f(0, 1) == doctest::Approx(0.5 * 2.0 * -3.0));
}

TEST_CASE("F_alpha block structure on a decoupled game") {
  Rng rng(4);
  const Vector a = random_vector(rng, 5);
  const std::vector<std::size_t> dims{2, 1, 2};
  const GameInstance game = decoupled_game(a, dims);
  const BlockLayout layout(dims);
  const RowMatrix z = random_matrix(rng, 3, 5);
  const SolverParams p{{0.1, 0.2, 0.3}, {0.0, 0.0, 0.0}};
  const RowMatrix f = F_alpha(p, game, z);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < 5; ++c) {
      const bool own = c >= layout.offset(i) && c < layout.offset(i) + layout.dim(i);
      const auto r = static_cast<Eigen::Index>(i);
      const auto cc = static_cast<Eigen::Index>(c);
      const double expected = own ? p.alpha[i] * 2.0 * (z(r, cc) - a(cc)) : 0.0;
      CHECK(f(r, cc) == doctest::Approx(expected));
    }
  }
  CHECK_THROWS_AS(F_alpha(p, game, random_matrix(rng, 2, 5)), InputError);
}

TEST_CASE("one agent without momentum takes a gradient step") {
  const GameInstance game = decoupled_game(Vector::Zero(1), {1});
  const RowMatrix z0 = RowMatrix::Ones(1, 1);
  const RowMatrix w = RowMatrix::Ones(1, 1);
  const SolverState s1 = step(initial_state(game, z0), SolverParams::uniform(1, 0.25, 0.0), game, w);
  CHECK(s1.z(0, 0) == doctest::Approx(0.5));
  CHECK(s1.z_prev(0, 0) == doctest::Approx(1.0));
  CHECK(s1.k == 1);
}

TEST_CASE("one agent without momentum follows gradient descent exactly") {
  const Vector a = (Vector(3) << 1.0, -2.0, 4.0).finished();
  const GameInstance game = decoupled_game(a, {3});
  const RowMatrix w = RowMatrix::Ones(1, 1);
  const SolverParams p = SolverParams::uniform(1, 0.1, 0.0);
  SolverState s = initial_state(game, RowMatrix::Zero(1, 3));
  Vector x = Vector::Zero(3);
  for (int k = 0; k < 50; ++k) {
    s = step(s, p, game, w);
    x -= 0.1 * 2.0 * (x - a);
    CHECK((s.z.row(0).transpose() - x).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("two-agent step evaluated by hand") {
  const Vector a = (Vector(2) << 1.0, -1.0).finished();
  const GameInstance game = decoupled_game(a, {1, 1});
  RowMatrix z0(2, 2);
  z0 << 2.0, 0.0, 4.0, 2.0;
  const Vector x_prev = (Vector(2) << 1.0, 3.0).finished();
  const SolverState s0 = initial_state(game, z0, x_prev);
  CHECK(s0.z_prev(0, 0) == 1.0);
  CHECK(s0.z_prev(1, 1) == 3.0);
  CHECK(s0.z_prev(0, 1) == 0.0);
  CHECK(s0.z_prev(1, 0) == 4.0);

  RowMatrix w(2, 2);
  w << 0.5, 0.5, 0.5, 0.5;
  const SolverParams p = SolverParams::uniform(2, 0.1, 0.5);
  const SolverState s1 = step(s0, p, game, w);
  CHECK(s1.z(0, 0) == doctest::Approx(3.1));
  CHECK(s1.z(0, 1) == doctest::Approx(1.0));
  CHECK(s1.z(1, 0) == doctest::Approx(3.0));
  CHECK(s1.z(1, 1) == doctest::Approx(0.1));
  const Vector x1 = s1.actions(game.layout());
  CHECK(x1(0) == doctest::Approx(3.1));
  CHECK(x1(1) == doctest::Approx(0.1));
}

TEST_CASE("zero momentum reproduces the momentum-free update") {
  Rng rng(8);
  const CournotInstance inst = small_cournot(6, 3, 10, 2);
  const GameInstance game = make_game(inst);
  const RowMatrix w = MixingMatrix::equal_in_neighbor(ScheduleGenerator(6, 0.3, 1).graph(0)).dense();
  const SolverParams p = SolverParams::uniform(6, 0.05, 0.0);
  SolverState s = initial_state(game, random_matrix(rng, 6, 10), random_vector(rng, 10));
  const RowMatrix mixed = w * s.z;
  const RowMatrix expected = mixed - F_alpha(p, game, mixed);
  CHECK((step(s, p, game, w).z - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("per-agent kernel matches the compact reference") {
  Rng rng(31);
  const CournotInstance inst = small_cournot(7, 4, 13, 3);
  const GameInstance game = make_game(inst);
  const ScheduleGenerator gen(7, 0.25, 3);
  SolverParams p;
  for (int i = 0; i < 7; ++i) {
    p.alpha.push_back(0.01 + 0.02 * rng.uniform());
    p.beta.push_back(0.8 * rng.uniform());
  }
  SolverState a = initial_state(game, random_matrix(rng, 7, 13), random_vector(rng, 13));
  SolverState b = a;
  StepWorkspace ws;
  for (std::size_t k = 0; k < 50; ++k) {
    const MixingMatrix w = MixingMatrix::equal_in_neighbor(gen.graph(k));
    advance(a, p, game, w, ws);
    b = step_reference(b, p, game, w.dense());
    CHECK((a.z - b.z).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((a.z_prev - b.z_prev).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(a.k == b.k);
  }
}

TEST_CASE("non-stochastic mixing matrices are rejected") {
  const GameInstance game = decoupled_game(Vector::Zero(2), {1, 1});
  const SolverState s = initial_state(game, RowMatrix::Zero(2, 2));
  RowMatrix w(2, 2);
  w << 0.7, 0.7, 0.5, 0.5;
  const SolverParams p = SolverParams::uniform(2, 0.1, 0.0);
  CHECK_THROWS_AS(step(s, p, game, w), InputError);
  CHECK_THROWS_AS(step_reference(s, p, game, w), InputError);
  CHECK_THROWS_AS(step(s, p, game, RowMatrix::Ones(1, 1)), InputError);
}

TEST_CASE("parameter validation and derived quantities") {
  CHECK_THROWS_AS(SolverParams::uniform(2, 0.0, 0.0).check(2), InputError);
  CHECK_THROWS_AS(SolverParams::uniform(2, 0.1, -0.1).check(2), InputError);
  CHECK_THROWS_AS(SolverParams::uniform(2, 0.1, 0.1).check(3), InputError);
  const SolverParams p{{0.1, 0.3}, {0.2, 0.0}};
  CHECK(p.alpha_max() == 0.3);
  CHECK(p.alpha_min() == 0.1);
  CHECK(p.beta_max() == 0.2);
  const GameConstants c{1.0, {2.0, 3.0}, {0.5, 1.0}};
  CHECK(p.lipschitz_alpha(c) == doctest::Approx(0.3 * std::sqrt(10.0)));
  const SolverParams u = SolverParams::uniform(2, 0.2, 0.0);
  const GameConstants d{1.0, {3.0, 3.0}, {1.0, 1.0}};
  CHECK(u.lipschitz_alpha(d) == doctest::Approx(0.2 * d.combined()));
}

TEST_CASE("random initial state is deterministic with zero first momentum") {
  const GameInstance game = make_game(small_cournot(4, 2, 6, 0));
  const SolverState a = random_initial_state(game, 5);
  const SolverState b = random_initial_state(game, 5);
  const SolverState c = random_initial_state(game, 6);
  CHECK((a.z - b.z).norm() == 0.0);
  CHECK((a.z - c.z).norm() > 0.0);
  CHECK((a.z - a.z_prev).norm() == 0.0);
}

TEST_CASE("DNE-HB reaches the equilibrium of a decoupled game on a complete graph") {
  const Vector a = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const GameInstance game = decoupled_game(a, {1, 1, 1});
  const MixingMatrix w = MixingMatrix::equal_in_neighbor(Digraph::complete(3));
  Rng rng(2);
  SolverState s = initial_state(game, random_matrix(rng, 3, 3));
  StepWorkspace ws;
  for (int k = 0; k < 2000; ++k) advance(s, SolverParams::uniform(3, 0.1, 0.5), game, w, ws);
  CHECK((s.actions(game.layout()) - a).norm() <= 1e-10);
}
