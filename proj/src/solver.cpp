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

#include "dnehb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "dnehb/errors.hpp"
#include "dnehb/rng.hpp"

namespace dnehb {

SolverParams SolverParams::uniform(std::size_t agents, double alpha, double beta) {
  return SolverParams{std::vector<double>(agents, alpha), std::vector<double>(agents, beta)};
}

double SolverParams::alpha_max() const { return *std::ranges::max_element(alpha); }
double SolverParams::alpha_min() const { return *std::ranges::min_element(alpha); }
double SolverParams::beta_max() const { return *std::ranges::max_element(beta); }

double SolverParams::lipschitz_alpha(const GameConstants& constants) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double li = constants.own_lipschitz.at(i);
    const double lmi = constants.cross_lipschitz.at(i);
    worst = std::max(worst, alpha[i] * alpha[i] * (lmi * lmi + li * li));
  }
  return std::sqrt(worst);
}

void SolverParams::check(std::size_t agents) const {
  if (alpha.size() != agents || beta.size() != agents) {
    throw InputError("need one step-size and one momentum parameter per agent");
  }
  for (std::size_t i = 0; i < agents; ++i) {
    if (!(alpha[i] > 0.0)) throw InputError("step-size of agent " + std::to_string(i) + " must be > 0");
    if (!(beta[i] >= 0.0)) throw InputError("momentum of agent " + std::to_string(i) + " must be >= 0");
  }
}

Vector SolverState::actions(const BlockLayout& layout) const {
  Vector x(static_cast<Eigen::Index>(layout.total()));
  for (std::size_t i = 0; i < layout.agents(); ++i) {
    const auto off = static_cast<Eigen::Index>(layout.offset(i));
    const auto ni = static_cast<Eigen::Index>(layout.dim(i));
    x.segment(off, ni) = z.row(static_cast<Eigen::Index>(i)).segment(off, ni).transpose();
  }
  return x;
}

namespace {

void check_shape(const GameInstance& game, const RowMatrix& z, const char* what) {
  if (static_cast<std::size_t>(z.rows()) != game.agents() ||
      static_cast<std::size_t>(z.cols()) != game.dimension()) {
    throw InputError(std::string(what) + " must be m x n");
  }
}

}  // namespace

SolverState initial_state(const GameInstance& game, const RowMatrix& z0, const Vector& x_prev) {
  check_shape(game, z0, "initial estimate matrix");
  if (static_cast<std::size_t>(x_prev.size()) != game.dimension()) {
    throw InputError("x^{-1} must have length n");
  }
  SolverState s{0, z0, z0};
  const BlockLayout& layout = game.layout();
  for (std::size_t i = 0; i < layout.agents(); ++i) {
    const auto off = static_cast<Eigen::Index>(layout.offset(i));
    const auto ni = static_cast<Eigen::Index>(layout.dim(i));
    s.z_prev.row(static_cast<Eigen::Index>(i)).segment(off, ni) = x_prev.segment(off, ni).transpose();
  }
  return s;
}

SolverState initial_state(const GameInstance& game, const RowMatrix& z0) {
  check_shape(game, z0, "initial estimate matrix");
  return SolverState{0, z0, z0};
}

SolverState random_initial_state(const GameInstance& game, std::uint64_t seed) {
  Rng rng(seed, streams::kInitialState);
  RowMatrix z0(static_cast<Eigen::Index>(game.agents()), static_cast<Eigen::Index>(game.dimension()));
  for (Eigen::Index i = 0; i < z0.rows(); ++i) {
    for (Eigen::Index j = 0; j < z0.cols(); ++j) z0(i, j) = rng.normal();
  }
  return initial_state(game, z0);
}

RowMatrix F_alpha(const SolverParams& params, const GameInstance& game, const RowMatrix& z) {
  check_shape(game, z, "estimate matrix");
  params.check(game.agents());
  const BlockLayout& layout = game.layout();
  RowMatrix out = RowMatrix::Zero(z.rows(), z.cols());
  for (std::size_t i = 0; i < layout.agents(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::span<const double> zi(z.row(row).data(), layout.total());
    std::span<double> gi(out.row(row).data() + layout.offset(i), layout.dim(i));
    game.gradient(i, zi, gi);
    for (double& g : gi) g *= params.alpha[i];
  }
  return out;
}

void advance(SolverState& state, const SolverParams& params, const GameInstance& game,
             const MixingMatrix& w, StepWorkspace& workspace) {
  const std::size_t m = game.agents();
  const std::size_t n = game.dimension();
  if (w.size() != m) throw InputError("mixing matrix size does not match the agent count");
  check_shape(game, state.z, "estimate matrix");
  check_shape(game, state.z_prev, "previous estimate matrix");
  params.check(m);

  RowMatrix& next = workspace.next;
  next.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const BlockLayout& layout = game.layout();
  const RowMatrix& z = state.z;
  const RowMatrix& zp = state.z_prev;
  const auto agents = static_cast<std::ptrdiff_t>(m);

#pragma omp parallel for schedule(static) if (m * n >= kParallelWorkThreshold)
  for (std::ptrdiff_t ii = 0; ii < agents; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto r = next.row(ii);
    r.setZero();
    for (const MixingMatrix::Entry& e : w.row(i)) r += e.weight * z.row(static_cast<Eigen::Index>(e.col));

    const auto off = static_cast<Eigen::Index>(layout.offset(i));
    const auto ni = static_cast<Eigen::Index>(layout.dim(i));
    Vector grad(ni);
    game.gradient(i, std::span<const double>(r.data(), n),
                  std::span<double>(grad.data(), static_cast<std::size_t>(ni)));

    r += params.beta[i] * (z.row(ii) - zp.row(ii));
    r.segment(off, ni) -= params.alpha[i] * grad.transpose();
  }

  // z^{k-1} <- z^k, z^k <- z^{k+1}; the old z^{k-1} becomes scratch.
  std::swap(state.z_prev, state.z);
  std::swap(state.z, next);
  ++state.k;
}

SolverState step(const SolverState& state, const SolverParams& params, const GameInstance& game,
                 const MixingMatrix& w) {
  SolverState out = state;
  StepWorkspace workspace;
  advance(out, params, game, w, workspace);
  return out;
}

SolverState step(const SolverState& state, const SolverParams& params, const GameInstance& game,
                 const RowMatrix& w) {
  return step(state, params, game, MixingMatrix::from_dense(w));
}

SolverState step_reference(const SolverState& state, const SolverParams& params,
                           const GameInstance& game, const RowMatrix& w) {
  const auto m = static_cast<Eigen::Index>(game.agents());
  if (w.rows() != m || w.cols() != m) throw InputError("mixing matrix must be m x m");
  MixingMatrix::from_dense(w);  // validates row-stochasticity
  check_shape(game, state.z, "estimate matrix");
  check_shape(game, state.z_prev, "previous estimate matrix");
  params.check(game.agents());

  const RowMatrix mixed = w * state.z;
  const Eigen::Map<const Vector> beta(params.beta.data(), m);
  SolverState out;
  out.k = state.k + 1;
  out.z = mixed - F_alpha(params, game, mixed) + beta.asDiagonal() * (state.z - state.z_prev);
  out.z_prev = state.z;
  return out;
}

}  // namespace dnehb
