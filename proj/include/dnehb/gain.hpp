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

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dnehb/game.hpp"
#include "dnehb/network.hpp"
#include "dnehb/solver.hpp"

namespace dnehb {

/// Network constants (c, sigma, phi) together with the game constants
/// (mu, L1, L2) that enter the small-gain matrix.
struct BoundConstants {
  double c = 0.0;
  double sigma = 0.0;
  double phi = 0.0;
  double mu = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;

  double L() const;
  void check() const;
};

BoundConstants bound_constants(const ScheduleConstants& network, const GameConstants& game);

struct PowerIteration {
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Spectral radius of a nonnegative 3x3 matrix by power iteration from the
/// all-ones vector. Converged once both the estimate and the normalized
/// iterate change by at most `tol` between iterations. Every 64 iterations
/// the working matrix is squared (and rescaled), so slowly separating
/// eigenvalues still converge quickly.
PowerIteration spectral_radius_power(const Eigen::Matrix3d& m, double tol = 1e-12,
                                     std::size_t max_iterations = 100000);

/// Largest real root of det(lambda I - M), Newton-polished.
double spectral_radius_cubic(const Eigen::Matrix3d& m);

/// M(alpha, beta) =
///   [ (1 + a L) c        a L                        b ]
///   [ sqrt(2) a L c      1 - (a_min s mu - a sqrt(2) L2)   b ]
///   [ phi (1 + a L) c    phi a L                    b ]
/// with a = max alpha_i, a_min = min alpha_i, b = max beta_i, s = sigma.
struct GainMatrix {
  Eigen::Matrix3d M;
  double rho = 0.0;
  double rho_power = 0.0;
  double rho_poly = 0.0;
  std::size_t power_iterations = 0;
  BoundConstants constants;
  double alpha_max = 0.0;
  double alpha_min = 0.0;
  double beta_max = 0.0;
};

/// Throws FeasibilityError unless 0 < alpha_max <= 2 / (L1 + mu), and
/// ComputationError when the two spectral radius methods disagree by more
/// than 1e-9.
GainMatrix build_gain_matrix(const BoundConstants& constants, double alpha_max, double alpha_min,
                             double beta_max);
GainMatrix build_gain_matrix(const BoundConstants& constants, const SolverParams& params);

struct Condition {
  std::string name;
  std::string group;  // "structural", "stated" or "certified"
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;  // lhs < rhs rather than lhs <= rhs
  double slack = 0.0;   // rhs - lhs
  bool pass = false;
};

/// Two families of step-size conditions are evaluated. The "stated" family is
/// the closed-form bound set with eta, eta1, eta2 as published. The
/// "certified" family is the exact condition for the diagonal entries of M
/// to be below 1 and det(I - M) > 0:
///
///   det(I - M) / a = eta1' - a eta2'
///   eta1' = eta (1 - c) - b (eta (1 + c (phi - 1)) + L phi)
///   eta2' = L c (sqrt(2) L + eta) (1 + b (phi - 1))
///
/// A report passes only when every condition of both families holds.
struct FeasibilityReport {
  BoundConstants constants;
  double alpha_max = 0.0;
  double alpha_min = 0.0;
  double beta_max = 0.0;
  double eta = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta1_certified = 0.0;
  double eta2_certified = 0.0;
  std::vector<Condition> conditions;
  bool structural = false;
  bool stated_pass = false;
  bool certified_pass = false;
  bool pass = false;
  std::optional<GainMatrix> gain;  // absent when alpha_max is outside (0, 2/(L1+mu)]

  double rho() const { return gain ? gain->rho : std::numeric_limits<double>::quiet_NaN(); }
};

/// Throws FeasibilityError when sigma mu <= sqrt(2) L2.
FeasibilityReport validate_parameters(const BoundConstants& constants, const SolverParams& params);

/// Same, but returns the report with `structural == false` instead of
/// throwing.
FeasibilityReport evaluate_parameters(const BoundConstants& constants, const SolverParams& params);

std::string format_report(const FeasibilityReport& report);

struct SuggestOptions {
  std::size_t alpha_points = 50;
  double alpha_decades = 8.0;
  std::size_t beta_points = 50;  // 1 restricts the grid to beta = 0
};

/// Grid search over uniform parameters: alpha_j = U 10^{-d (1 - j / P)} for
/// j = 0..P-1 with U = 2 / (L1 + mu), beta_l = l / Q for l = 0..Q-1. Returns
/// the passing pair with the smallest spectral radius; ties keep the first
/// pair in (alpha, beta) order. Throws FeasibilityError when sigma mu <=
/// sqrt(2) L2 or no grid point passes.
SolverParams suggest_parameters(const BoundConstants& constants, std::size_t agents,
                                const SuggestOptions& options = {});

}  // namespace dnehb
