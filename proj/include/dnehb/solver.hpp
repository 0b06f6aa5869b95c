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
#include <cstdint>
#include <vector>

#include "dnehb/game.hpp"
#include "dnehb/network.hpp"
#include "dnehb/types.hpp"

namespace dnehb {

/// Per-agent step-sizes alpha_i > 0 and momentum parameters beta_i >= 0.
/// All beta_i = 0 gives the momentum-free DNE baseline.
struct SolverParams {
  std::vector<double> alpha;
  std::vector<double> beta;

  static SolverParams uniform(std::size_t agents, double alpha, double beta);

  std::size_t agents() const { return alpha.size(); }
  double alpha_max() const;
  double alpha_min() const;
  double beta_max() const;

  /// L_alpha = sqrt(max_i alpha_i^2 (L_-i^2 + L_i^2)).
  double lipschitz_alpha(const GameConstants& constants) const;

  /// Throws InputError unless there is one alpha_i > 0 and one beta_i >= 0
  /// per agent.
  void check(std::size_t agents) const;
};

/// Estimates z^k (row i = agent i's estimate of the joint action, whose i-th
/// block is agent i's own action x_i^k) and the previous iterate z^{k-1}.
struct SolverState {
  std::size_t k = 0;
  RowMatrix z;
  RowMatrix z_prev;

  /// x^k, read off the diagonal blocks.
  Vector actions(const BlockLayout& layout) const;
};

/// z^{-1} equals z^0 except in the diagonal blocks, which hold x^{-1}.
SolverState initial_state(const GameInstance& game, const RowMatrix& z0, const Vector& x_prev);

/// x^{-1} = x^0, so the first momentum term vanishes.
SolverState initial_state(const GameInstance& game, const RowMatrix& z0);

/// Entries of z^0 i.i.d. standard normal from Rng(seed, streams::kInitialState),
/// drawn row by row; x^{-1} = x^0.
SolverState random_initial_state(const GameInstance& game, std::uint64_t seed);

/// Row i is zero except block i, which holds alpha_i grad_i J_i(z_{i:}).
RowMatrix F_alpha(const SolverParams& params, const GameInstance& game, const RowMatrix& z);

/// Scratch buffers reused across iterations.
struct StepWorkspace {
  RowMatrix next;
};

/// One DNE-HB iteration, agent by agent:
///
///   r_i       = sum_j [W]_ij z_j^k
///   x_i^{k+1} = [r_i]_i - alpha_i grad_i J_i(r_i) + beta_i (x_i^k - x_i^{k-1})
///   z_{i,-i}^{k+1} = [r_i]_{-i} + beta_i (z_{i,-i}^k - z_{i,-i}^{k-1})
///
/// The loop over agents runs under OpenMP once m * n reaches
/// kParallelWorkThreshold.
void advance(SolverState& state, const SolverParams& params, const GameInstance& game,
             const MixingMatrix& w, StepWorkspace& workspace);

SolverState step(const SolverState& state, const SolverParams& params, const GameInstance& game,
                 const MixingMatrix& w);

/// Dense W overload; throws InputError unless W is nonnegative and
/// row-stochastic.
SolverState step(const SolverState& state, const SolverParams& params, const GameInstance& game,
                 const RowMatrix& w);

/// Serial reference in matrix form:
///   z^{k+1} = W z^k - F_alpha(W z^k) + Diag(beta_1..beta_m)(z^k - z^{k-1}).
SolverState step_reference(const SolverState& state, const SolverParams& params,
                           const GameInstance& game, const RowMatrix& w);

/// Value of m * n below which `advance` stays serial.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 14;

}  // namespace dnehb
