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

#include "dnehb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dnehb/errors.hpp"

namespace dnehb {

namespace {

void check_weights(const RowMatrix& u, const Vector& pi) {
  if (static_cast<Eigen::Index>(pi.size()) != u.rows()) throw InputError("weight vector length must equal m");
  if (pi.size() == 0 || !(pi.minCoeff() > 0.0)) throw InputError("weights must be positive");
}

}  // namespace

double weighted_norm(const RowMatrix& u, const Vector& pi) {
  check_weights(u, pi);
  return std::sqrt(pi.dot(u.rowwise().squaredNorm()));
}

Vector weighted_average(const RowMatrix& z, const Vector& pi) {
  check_weights(z, pi);
  return (pi.transpose() * z).transpose();
}

LyapunovVector lyapunov(const SolverState& state, const Vector& pi, const Vector& x_star) {
  if (x_star.size() != state.z.cols()) throw InputError("equilibrium length must equal n");
  const Vector avg = weighted_average(state.z, pi);
  const RowMatrix dev = state.z.rowwise() - avg.transpose();
  return LyapunovVector{weighted_norm(dev, pi), (avg - x_star).norm(), (state.z - state.z_prev).norm()};
}

double consensus_error(const RowMatrix& z) {
  if (z.rows() < 2) throw InputError("consensus error needs m >= 2");
  return (z.colwise().maxCoeff() - z.colwise().minCoeff()).maxCoeff();
}

LocalGain local_gain_matrix(const WeightSchedule& ws, std::size_t k, const GameConstants& game,
                            const SolverParams& params) {
  const std::size_t m = ws.nodes();
  params.check(m);
  if (game.own_lipschitz.size() != m) throw InputError("game constants do not match the agent count");
  LocalGain g;
  g.c_k = contraction_coefficient(ws, k);
  const Vector& pn = ws.pi[k + 1];
  g.phi_next = 1.0 / std::sqrt(pn.minCoeff());
  g.lipschitz_alpha = params.lipschitz_alpha(game);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = pn[static_cast<Eigen::Index>(i)] * params.alpha[i];
    g.q_k = std::max({g.q_k, std::abs(1.0 - t * game.mu), std::abs(1.0 - t * game.own_lipschitz[i])});
  }
  const double la = g.lipschitz_alpha;
  const double b = params.beta_max();
  const double r2 = std::numbers::sqrt2;
  g.M << (1.0 + la) * g.c_k, la, b,
      r2 * la * g.c_k, params.alpha_max() * r2 * game.max_cross() + g.q_k, b,
      g.phi_next * (1.0 + la) * g.c_k, g.phi_next * la, b;
  return g;
}

namespace {

std::array<double, 3> bounds(const LyapunovVector& v, double c, const LocalGain& g, double alpha_max,
                             double l2, double beta_max) {
  const double la = g.lipschitz_alpha;
  const double r2 = std::numbers::sqrt2;
  return {(1.0 + la) * c * v.v1 + la * v.v2 + beta_max * v.v3,
          (alpha_max * r2 * l2 + g.q_k) * v.v2 + r2 * la * c * v.v1 + beta_max * v.v3,
          g.phi_next * (1.0 + la) * c * v.v1 + g.phi_next * la * v.v2 + beta_max * v.v3};
}

bool within(double lhs, double rhs, double tol) { return rhs - lhs >= -tol * (1.0 + std::abs(rhs)); }

}  // namespace

PropositionCheck check_transition(const SolverState& now, const SolverState& next, const WeightSchedule& ws,
                                  const GameConstants& game, const SolverParams& params, const Vector& x_star,
                                  const CheckOptions& options) {
  const std::size_t k = now.k;
  if (next.k != k + 1) throw InputError("states are not consecutive iterations");
  if (k >= ws.horizon() || ws.pi.size() != ws.horizon() + 1) {
    throw InputError("weight schedule does not cover the transition");
  }
  PropositionCheck pc;
  pc.k = k;
  pc.now = lyapunov(now, ws.pi[k], x_star);
  pc.next = lyapunov(next, ws.pi[k + 1], x_star);
  pc.gain = local_gain_matrix(ws, k, game, params);

  const double a = params.alpha_max();
  const double b = params.beta_max();
  const double l2 = game.max_cross();
  pc.rhs = bounds(pc.now, pc.gain.c_k, pc.gain, a, l2, b);
  const std::array<double, 3> lhs{pc.next.v1, pc.next.v2, pc.next.v3};
  const Eigen::Vector3d mv = pc.gain.M * pc.now.as_vector();
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    pc.slack[i] = pc.rhs[i] - lhs[i];
    pc.matrix_slack[i] = mv[i] - lhs[i];
    ok = ok && within(lhs[i], pc.rhs[i], options.rel_tol) && within(lhs[i], mv[i], options.rel_tol);
  }

  const double phi_now = 1.0 / std::sqrt(ws.pi[k].minCoeff());
  pc.state_diff_full_rhs = pc.rhs[2] + phi_now * pc.now.v1;
  pc.state_diff_full_slack = pc.state_diff_full_rhs - lhs[2];

  const RowMatrix gap = now.z.rowwise() - x_star.transpose();
  const double total = std::pow(weighted_norm(gap, ws.pi[k]), 2);
  pc.decomposition_residual =
      std::abs(total - pc.now.v1 * pc.now.v1 - pc.now.v2 * pc.now.v2) / std::max(1.0, total);

  if (options.global_gain) {
    pc.dominated = (pc.gain.M.array() <= options.global_gain->array() * (1.0 + options.rel_tol) +
                                             options.rel_tol).all();
  }
  pc.pass = ok && pc.dominated;

  if (!ok) {
    const std::array<double, 3> loose = bounds(pc.now, 1.0, pc.gain, a, l2, b);
    bool recovered = true;
    for (int i = 0; i < 3; ++i) recovered = recovered && within(lhs[i], loose[i], options.rel_tol);
    pc.metric_convention_suspect = recovered;
  }
  return pc;
}

std::vector<PropositionCheck> check_propositions(std::span<const SolverState> trace, const WeightSchedule& ws,
                                                 const GameInstance& game, const SolverParams& params,
                                                 const Vector& x_star, const CheckOptions& options) {
  if (trace.size() < 2) throw InputError("trace needs at least two states");
  if (trace.size() - 1 > ws.horizon()) throw InputError("trace is longer than the weight schedule");
  std::vector<PropositionCheck> out;
  out.reserve(trace.size() - 1);
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    if (trace[t].k != t) throw InputError("trace entry does not match its iteration index");
    out.push_back(check_transition(trace[t], trace[t + 1], ws, game.constants(), params, x_star, options));
  }
  return out;
}

double fit_rate(std::span<const double> series) {
  if (series.size() < 30) throw InputError("rate fit needs at least 30 entries");
  for (double v : series) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("rate fit needs a positive finite series");
  }
  const std::size_t start = series.size() / 3;
  const double floor = 1e3 * std::numeric_limits<double>::epsilon();
  std::vector<double> xs, ys;
  for (std::size_t k = start; k < series.size(); ++k) {
    if (series[k] < floor) continue;
    xs.push_back(static_cast<double>(k));
    ys.push_back(std::log(series[k]));
  }
  if (xs.size() < 2) throw ComputationError("fewer than two entries above the precision floor");
  const Eigen::Map<const Vector> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Eigen::Map<const Vector> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const Vector dx = x.array() - x.mean();
  return std::exp(dx.dot(y.array().matrix() - Vector::Constant(y.size(), y.mean())) / dx.squaredNorm());
}

}  // namespace dnehb
