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
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "dnehb/errors.hpp"
#include "dnehb/gain.hpp"
#include "gain_draws.hpp"

using namespace dnehb;

namespace {

const BoundConstants kSimple{0.5, 0.25, 2.0, 1.0, 1.0, 0.0};

double eigen_radius(const Eigen::Matrix3d& m) { return m.eigenvalues().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("gain matrix of the reference constants") {
  const GainMatrix g = build_gain_matrix(kSimple, SolverParams::uniform(3, 0.5, 0.0));
  Eigen::Matrix3d expected;
  expected << 0.75, 0.5, 0.0, std::sqrt(2.0) * 0.25, 0.875, 0.0, 1.5, 1.0, 0.0;
  CHECK((g.M - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(g.M(1, 0) == doctest::Approx(0.3536).epsilon(1e-4));
  const double a = 0.75, b = 0.5, c = std::sqrt(2.0) * 0.25, d = 0.875;
  const double block = 0.5 * (a + d + std::sqrt((a - d) * (a - d) + 4.0 * b * c));
  CHECK(g.rho == doctest::Approx(block).epsilon(1e-12));
  CHECK(g.rho == doctest::Approx(eigen_radius(g.M)).epsilon(1e-12));
  CHECK(std::abs(g.rho_power - g.rho_poly) <= 1e-9);
}

TEST_CASE("vanishing step-size approaches radius one") {
  const GainMatrix g = build_gain_matrix(kSimple, SolverParams::uniform(2, 1e-12, 0.0));
  Eigen::Matrix3d limit;
  limit << 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0;
  CHECK((g.M - limit).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK(g.rho < 1.0);
  CHECK(g.rho > 1.0 - 1e-11);
}

TEST_CASE("step-size beyond 2 / (L1 + mu) is a feasibility error") {
  CHECK_THROWS_AS(build_gain_matrix(kSimple, SolverParams::uniform(2, 1.01, 0.0)), FeasibilityError);
  CHECK_NOTHROW(build_gain_matrix(kSimple, SolverParams::uniform(2, 1.0, 0.0)));
  BoundConstants bad = kSimple;
  bad.c = 1.0;
  CHECK_THROWS_AS(build_gain_matrix(bad, SolverParams::uniform(2, 0.1, 0.0)), InputError);
}

TEST_CASE("power iteration and cubic roots agree on random nonnegative matrices") {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 9; ++i) m.data()[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 2.0);
    m.diagonal().array() += 0.01;
    const PowerIteration p = spectral_radius_power(m);
    CHECK(p.converged);
    CHECK(std::abs(p.rho - spectral_radius_cubic(m)) <= 1e-9 * std::max(1.0, p.rho));
    CHECK(std::abs(p.rho - eigen_radius(m)) <= 1e-9 * std::max(1.0, p.rho));
  }
  CHECK_THROWS_AS(spectral_radius_power(-Eigen::Matrix3d::Identity()), InputError);
  CHECK(spectral_radius_power(Eigen::Matrix3d::Zero()).rho == 0.0);
}

TEST_CASE("nearly degenerate Perron roots still converge") {
  Eigen::Matrix3d m;
  m << 0.999999, 1e-9, 0.0, 1e-9, 0.999998, 0.0, 0.5, 0.5, 0.0;
  const PowerIteration p = spectral_radius_power(m);
  CHECK(p.converged);
  CHECK(std::abs(p.rho - spectral_radius_cubic(m)) <= 1e-9);
}

TEST_CASE("momentum-free parameters without coupling pass") {
  const double L = kSimple.L();
  const double c = kSimple.c;
  const double eta = kSimple.sigma * kSimple.mu;
  const double eta1 = eta * (1.0 - c);
  const double eta2 = std::sqrt(2.0) * L * c + c * eta;
  const double upper = std::min({2.0 / (kSimple.L1 + kSimple.mu), (1.0 - c) / (L * c), eta1 / eta2});
  for (double f : {0.01, 0.3, 0.9}) {
    const FeasibilityReport r = validate_parameters(kSimple, SolverParams::uniform(4, f * upper, 0.0));
    CHECK(r.pass);
    CHECK(r.eta == doctest::Approx(eta));
    REQUIRE(r.gain);
    CHECK(r.gain->rho < 1.0);
  }
}

TEST_CASE("coupling at least sigma mu / sqrt(2) is structurally infeasible") {
  BoundConstants k = kSimple;
  k.L2 = k.sigma * k.mu / std::numbers::sqrt2;
  CHECK_THROWS_AS(validate_parameters(k, SolverParams::uniform(2, 0.01, 0.0)), FeasibilityError);
  CHECK_FALSE(evaluate_parameters(k, SolverParams::uniform(2, 0.01, 0.0)).structural);
  CHECK_THROWS_AS(suggest_parameters(k, 2), FeasibilityError);
}

TEST_CASE("weak coupling relative to sigma mu passes the structural check") {
  const BoundConstants k{0.999, 0.04, 5.0, 11.0, 16.0, 0.03};
  CHECK(evaluate_parameters(k, SolverParams::uniform(20, 1e-6, 0.0)).structural);
}

TEST_CASE("suggested parameters are feasible") {
  const SolverParams p = suggest_parameters(kSimple, 3);
  const FeasibilityReport r = validate_parameters(kSimple, p);
  CHECK(r.pass);
  CHECK(r.rho() < 1.0);
  CHECK(p.alpha_max() < 2.0 / (kSimple.L1 + kSimple.mu));

  SuggestOptions no_momentum;
  no_momentum.beta_points = 1;
  const SolverParams q = suggest_parameters(kSimple, 3, no_momentum);
  CHECK(q.beta_max() == 0.0);
  CHECK(validate_parameters(kSimple, q).pass);
  CHECK(validate_parameters(kSimple, q).rho() >= r.rho() - 1e-15);
}

TEST_CASE("accepted random parameters always certify rho < 1") {
  Rng rng(2024);
  int accepted = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto d = dnehb::testing::random_gain_draw(rng);
    const FeasibilityReport r = evaluate_parameters(d.constants, d.params);
    if (r.gain) CHECK(std::abs(r.gain->rho_power - r.gain->rho_poly) <= 1e-9);
    if (r.pass) {
      ++accepted;
      CHECK(r.gain->rho < 1.0);
    }
    if (r.gain && r.gain->rho >= 1.0) CHECK_FALSE(r.pass);
  }
  CHECK(accepted > 100);
}

TEST_CASE("closed-form step-size bound alone admits a radius above one") {
  Rng rng(2024);
  int unsound = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto d = dnehb::testing::random_gain_draw(rng);
    const FeasibilityReport r = evaluate_parameters(d.constants, d.params);
    if (r.structural && r.stated_pass && r.gain && r.gain->rho >= 1.0) ++unsound;
  }
  CHECK(unsound > 0);
}

TEST_CASE("report text lists every condition") {
  const FeasibilityReport r = validate_parameters(kSimple, SolverParams::uniform(2, 0.01, 0.0));
  const std::string text = format_report(r);
  for (const Condition& c : r.conditions) CHECK(text.find(c.name) != std::string::npos);
  CHECK(text.find("overall: pass") != std::string::npos);
}

TEST_CASE("power iteration does not stop on a coincidental estimate match") {
  Eigen::Matrix3d m;
  m << 1.0020981163211196, 0.0032960036282955137, 0.22,
      0.0046556877202133268, 0.99976875303474577, 0.22,
      3.0688187590435718, 0.010093660091411326, 0.22;
  const PowerIteration p = spectral_radius_power(m);
  CHECK(p.converged);
  CHECK(p.iterations > 13);
  CHECK(std::abs(p.rho - eigen_radius(m)) <= 1e-10);
  CHECK(std::abs(p.rho - spectral_radius_cubic(m)) <= 1e-10);
}
