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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dnehb/game.hpp"
#include "dnehb/network.hpp"
#include "dnehb/solver.hpp"
#include "dnehb/types.hpp"

namespace dnehb {

/// ||u||_pi = sqrt(sum_i pi_i ||u_i||^2). Throws InputError for a
/// nonpositive weight or a size mismatch.
double weighted_norm(const RowMatrix& u, const Vector& pi);

/// v1 = ||z - zhat||_pi, v2 = ||zhat - x*||, v3 = ||z - z_prev|| (Frobenius),
/// where zhat = sum_i pi_i z_i is the weighted average row.
struct LyapunovVector {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;

  Eigen::Vector3d as_vector() const { return {v1, v2, v3}; }
};

Vector weighted_average(const RowMatrix& z, const Vector& pi);

LyapunovVector lyapunov(const SolverState& state, const Vector& pi, const Vector& x_star);

/// max_{i != j} ||z_i - z_j||_inf. Throws InputError when m < 2.
double consensus_error(const RowMatrix& z);

/// Per-iteration gain matrix
///   [ (1 + La) c_k       La                    b ]
///   [ sqrt(2) La c_k     a sqrt(2) L2 + q_k    b ]
///   [ phi_{k+1}(1+La)c_k phi_{k+1} La          b ]
/// with La = L_alpha, q_k = max_i max(|1 - pi_{k+1,i} alpha_i mu|,
/// |1 - pi_{k+1,i} alpha_i L_i|) and phi_{k+1} = 1 / sqrt(min pi_{k+1}).
struct LocalGain {
  Eigen::Matrix3d M;
  double c_k = 0.0;
  double q_k = 0.0;
  double phi_next = 0.0;
  double lipschitz_alpha = 0.0;
};

LocalGain local_gain_matrix(const WeightSchedule& ws, std::size_t k, const GameConstants& game,
                            const SolverParams& params);

/// Checks of the transition k -> k+1.
struct PropositionCheck {
  std::size_t k = 0;
  LyapunovVector now;
  LyapunovVector next;
  LocalGain gain;
  std::array<double, 3> rhs{};
  std::array<double, 3> slack{};         // rhs - lhs of the three scalar bounds
  std::array<double, 3> matrix_slack{};  // M_k V_k - V_{k+1}
  double decomposition_residual = 0.0;   // relative gap in ||z - x*||_pi^2 = v1^2 + v2^2
  bool dominated = true;                 // M_k <= M entrywise, when M is supplied
  bool pass = false;
  // A bound failed but holds again with c_k replaced by 1, pointing at the
  // path-selection convention behind the edge-utility rather than the solver.
  bool metric_convention_suspect = false;
  // Third bound with the ||z^k - 1 zhat^k|| <= phi_k v1 term that the
  // triangle inequality on ||W_k z^k - z^k|| also produces.
  double state_diff_full_rhs = 0.0;
  double state_diff_full_slack = 0.0;
};

struct CheckOptions {
  double rel_tol = 1e-9;
  std::optional<Eigen::Matrix3d> global_gain;
};

PropositionCheck check_transition(const SolverState& now, const SolverState& next, const WeightSchedule& ws,
                                  const GameConstants& game, const SolverParams& params, const Vector& x_star,
                                  const CheckOptions& options = {});

/// trace[t] must hold iteration t, and the schedule must cover every
/// transition; throws InputError otherwise.
std::vector<PropositionCheck> check_propositions(std::span<const SolverState> trace, const WeightSchedule& ws,
                                                 const GameInstance& game, const SolverParams& params,
                                                 const Vector& x_star, const CheckOptions& options = {});

/// exp of the least-squares slope of log r_k over the final two thirds of the
/// series, skipping entries below 1e3 * DBL_EPSILON. Throws InputError for
/// fewer than 30 entries or a nonpositive or non-finite entry.
double fit_rate(std::span<const double> series);

}  // namespace dnehb
