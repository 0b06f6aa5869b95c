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

#include "dnehb/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "dnehb/errors.hpp"

namespace dnehb {

double BoundConstants::L() const { return std::hypot(L1, L2); }

void BoundConstants::check() const {
  if (!(c > 0.0 && c < 1.0)) throw InputError("c must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw InputError("sigma must lie in (0, 1]");
  if (!(phi >= 1.0) || !std::isfinite(phi)) throw InputError("phi must be finite and >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("mu must be positive");
  if (!(L1 > 0.0) || !std::isfinite(L1)) throw InputError("L1 must be positive");
  if (!(L2 >= 0.0) || !std::isfinite(L2)) throw InputError("L2 must be nonnegative");
}

BoundConstants bound_constants(const ScheduleConstants& network, const GameConstants& game) {
  return BoundConstants{network.c, network.sigma, network.phi, game.mu, game.max_own(), game.max_cross()};
}

PowerIteration spectral_radius_power(const Eigen::Matrix3d& m, double tol, std::size_t max_iterations) {
  if (!m.allFinite() || m.minCoeff() < 0.0) throw InputError("matrix must be finite and nonnegative");
  Eigen::Matrix3d a = m;
  double log_scale = 0.0;  // a = m^power / exp(log_scale)
  double power = 1.0;
  Eigen::Vector3d x = Eigen::Vector3d::Ones();
  double previous = std::numeric_limits<double>::quiet_NaN();
  std::size_t since_squaring = 0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::Vector3d y = a * x;
    const double norm = y.lpNorm<Eigen::Infinity>();
    if (norm == 0.0) return {0.0, it, true};
    const double estimate = std::exp((std::log(norm) + log_scale) / power);
    const Eigen::Vector3d next = y / norm;
    const double moved = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    if (std::abs(estimate - previous) <= tol * std::max(1.0, estimate) && moved <= tol) {
      return {estimate, it, true};
    }
    previous = estimate;
    if (++since_squaring == 64 && power < 1e9) {
      a = a * a;
      const double scale = a.maxCoeff();
      if (scale == 0.0) return {0.0, it, true};
      a /= scale;
      log_scale = 2.0 * log_scale + std::log(scale);
      power *= 2.0;
      since_squaring = 0;
      previous = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return {previous, max_iterations, false};
}

double spectral_radius_cubic(const Eigen::Matrix3d& m) {
  // lambda^3 + a2 lambda^2 + a1 lambda + a0
  const double a2 = -m.trace();
  const double a1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                    m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double a0 = -m.determinant();
  const auto f = [&](double l) { return ((l + a2) * l + a1) * l + a0; };
  const auto df = [&](double l) { return (3.0 * l + 2.0 * a2) * l + a1; };

  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  double t;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    t = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
  } else if (p == 0.0) {
    t = 0.0;
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    t = r * std::cos(std::acos(arg) / 3.0);
  }
  double root = t - a2 / 3.0;
  for (int i = 0; i < 8; ++i) {
    const double d = df(root);
    if (d == 0.0) break;
    const double candidate = root - f(root) / d;
    if (!(std::abs(f(candidate)) < std::abs(f(root)))) break;
    root = candidate;
  }
  return root;
}

GainMatrix build_gain_matrix(const BoundConstants& k, double alpha_max, double alpha_min, double beta_max) {
  k.check();
  if (!(alpha_min > 0.0) || alpha_min > alpha_max) throw InputError("need 0 < alpha_min <= alpha_max");
  if (!(beta_max >= 0.0)) throw InputError("beta_max must be >= 0");
  const double upper = 2.0 / (k.L1 + k.mu);
  if (!(alpha_max > 0.0 && alpha_max <= upper)) {
    throw FeasibilityError(fmt::format("max step-size {} outside (0, 2/(L1+mu)] = (0, {}]", alpha_max, upper));
  }
  const double aL = alpha_max * k.L();
  const double r2 = std::numbers::sqrt2;
  GainMatrix g;
  g.M << (1.0 + aL) * k.c, aL, beta_max,
      r2 * aL * k.c, 1.0 - (alpha_min * k.sigma * k.mu - alpha_max * r2 * k.L2), beta_max,
      k.phi * (1.0 + aL) * k.c, k.phi * aL, beta_max;
  if (g.M.minCoeff() < 0.0) {
    throw FeasibilityError("gain matrix has a negative entry (alpha_min sigma mu - alpha_max sqrt(2) L2 > 1)");
  }
  const PowerIteration pw = spectral_radius_power(g.M);
  g.rho_power = pw.rho;
  g.power_iterations = pw.iterations;
  g.rho_poly = spectral_radius_cubic(g.M);
  if (!pw.converged || !(std::abs(g.rho_power - g.rho_poly) <= 1e-9)) {
    throw ComputationError(fmt::format("spectral radius mismatch: power {} vs cubic {}", g.rho_power, g.rho_poly));
  }
  g.rho = g.rho_power;
  g.constants = k;
  g.alpha_max = alpha_max;
  g.alpha_min = alpha_min;
  g.beta_max = beta_max;
  return g;
}

GainMatrix build_gain_matrix(const BoundConstants& constants, const SolverParams& params) {
  params.check(params.agents());
  if (params.agents() == 0) throw InputError("parameters for zero agents");
  return build_gain_matrix(constants, params.alpha_max(), params.alpha_min(), params.beta_max());
}

namespace {

Condition make_condition(std::string name, std::string group, double lhs, double rhs, bool strict) {
  Condition c{std::move(name), std::move(group), lhs, rhs, strict, rhs - lhs, false};
  c.pass = strict ? lhs < rhs : lhs <= rhs;
  return c;
}

}  // namespace

FeasibilityReport evaluate_parameters(const BoundConstants& k, const SolverParams& params) {
  k.check();
  if (params.agents() == 0) throw InputError("parameters for zero agents");
  params.check(params.agents());
  FeasibilityReport r;
  r.constants = k;
  const double a = r.alpha_max = params.alpha_max();
  const double al = r.alpha_min = params.alpha_min();
  const double b = r.beta_max = params.beta_max();
  const double c = k.c;
  const double phi = k.phi;
  const double L = k.L();
  const double r2 = std::numbers::sqrt2;
  const double eta = r.eta = (al * k.sigma * k.mu - a * r2 * k.L2) / a;
  r.eta1 = eta * (1.0 - c) - b * (2.0 - c) * (eta + L);
  r.eta2 = r2 * L * c * (1.0 + b * (phi - c)) + b * c * eta * (phi - 1.0) + c * eta;
  r.eta1_certified = eta * (1.0 - c) - b * (eta * (1.0 + c * (phi - 1.0)) + L * phi);
  r.eta2_certified = L * c * (r2 * L + eta) * (1.0 + b * (phi - 1.0));

  auto& cs = r.conditions;
  cs.push_back(make_condition("sqrt(2) L2 < sigma mu", "structural", r2 * k.L2, k.sigma * k.mu, true));
  r.structural = cs.back().pass;

  cs.push_back(make_condition("alpha_max sqrt(2) L2 / (sigma mu) < alpha_min", "stated",
                              a * r2 * k.L2 / (k.sigma * k.mu), al, true));
  cs.push_back(make_condition("alpha_max <= 2 / (L1 + mu)", "stated", a, 2.0 / (k.L1 + k.mu), false));
  cs.push_back(make_condition("alpha_max <= (1 - c) / (L c)", "stated", a, (1.0 - c) / (L * c), false));
  cs.push_back(make_condition("alpha_max <= eta1 / eta2", "stated", a,
                              r.eta2 > 0.0 ? r.eta1 / r.eta2 : -std::numeric_limits<double>::infinity(),
                              false));
  cs.push_back(make_condition("beta_max < eta (1 - c) / ((2 - c) (eta + L))", "stated", b,
                              eta * (1.0 - c) / ((2.0 - c) * (eta + L)), true));

  cs.push_back(make_condition("M11 < 1: alpha_max < (1 - c) / (L c)", "certified", a, (1.0 - c) / (L * c), true));
  cs.push_back(make_condition("M22 < 1: 0 < eta", "certified", 0.0, eta, true));
  cs.push_back(make_condition("M33 < 1: beta_max < 1", "certified", b, 1.0, true));
  cs.push_back(make_condition("det(I - M) > 0: beta_max < eta (1 - c) / (eta (1 + c (phi - 1)) + L phi)",
                              "certified", b, eta * (1.0 - c) / (eta * (1.0 + c * (phi - 1.0)) + L * phi), true));
  cs.push_back(make_condition("det(I - M) > 0: alpha_max < eta1' / eta2'", "certified", a,
                              r.eta1_certified / r.eta2_certified, true));

  r.stated_pass = true;
  r.certified_pass = true;
  for (const Condition& cond : cs) {
    if (cond.group == "stated") r.stated_pass = r.stated_pass && cond.pass;
    if (cond.group == "certified") r.certified_pass = r.certified_pass && cond.pass;
  }
  r.pass = r.structural && r.stated_pass && r.certified_pass;
  try {
    r.gain = build_gain_matrix(k, a, al, b);
  } catch (const FeasibilityError&) {
    r.gain.reset();
    r.pass = false;
  }
  return r;
}

FeasibilityReport validate_parameters(const BoundConstants& constants, const SolverParams& params) {
  FeasibilityReport r = evaluate_parameters(constants, params);
  if (!r.structural) {
    throw FeasibilityError(fmt::format("structurally infeasible: sigma mu = {} <= sqrt(2) L2 = {}",
                                       constants.sigma * constants.mu, std::numbers::sqrt2 * constants.L2));
  }
  return r;
}

std::string format_report(const FeasibilityReport& r) {
  std::ostringstream out;
  const BoundConstants& k = r.constants;
  out << fmt::format("constants: c = {} sigma = {} phi = {} mu = {} L1 = {} L2 = {} L = {}\n", k.c, k.sigma,
                     k.phi, k.mu, k.L1, k.L2, k.L());
  out << fmt::format("parameters: alpha_max = {} alpha_min = {} beta_max = {}\n", r.alpha_max, r.alpha_min,
                     r.beta_max);
  out << fmt::format("eta = {} eta1 = {} eta2 = {} eta1' = {} eta2' = {}\n", r.eta, r.eta1, r.eta2,
                     r.eta1_certified, r.eta2_certified);
  for (const Condition& c : r.conditions) {
    out << fmt::format("[{}] {} {}: lhs = {} rhs = {} slack = {}\n", c.pass ? "ok" : "FAIL", c.group, c.name,
                       c.lhs, c.rhs, c.slack);
  }
  if (r.gain) {
    const Eigen::Matrix3d& m = r.gain->M;
    for (int i = 0; i < 3; ++i) out << fmt::format("M[{}] = {} {} {}\n", i, m(i, 0), m(i, 1), m(i, 2));
    out << fmt::format("rho_M = {} (power {}, cubic {})\n", r.gain->rho, r.gain->rho_power, r.gain->rho_poly);
  } else {
    out << "rho_M = n/a (max step-size outside (0, 2/(L1+mu)])\n";
  }
  out << fmt::format("stated: {} certified: {} overall: {}\n", r.stated_pass ? "pass" : "fail",
                     r.certified_pass ? "pass" : "fail", r.pass ? "pass" : "fail");
  return out.str();
}

SolverParams suggest_parameters(const BoundConstants& k, std::size_t agents, const SuggestOptions& options) {
  k.check();
  if (agents == 0) throw InputError("agents must be >= 1");
  if (options.alpha_points == 0 || options.beta_points == 0) throw InputError("grid must be non-empty");
  if (!(k.sigma * k.mu > std::numbers::sqrt2 * k.L2)) {
    throw FeasibilityError("structurally infeasible: sigma mu <= sqrt(2) L2");
  }
  const double upper = 2.0 / (k.L1 + k.mu);
  const auto pa = static_cast<double>(options.alpha_points);
  const auto pb = static_cast<double>(options.beta_points);
  std::optional<SolverParams> best;
  double best_rho = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < options.alpha_points; ++j) {
    const double alpha = upper * std::pow(10.0, -options.alpha_decades * (1.0 - static_cast<double>(j) / pa));
    for (std::size_t l = 0; l < options.beta_points; ++l) {
      const double beta = static_cast<double>(l) / pb;
      SolverParams p = SolverParams::uniform(agents, alpha, beta);
      const FeasibilityReport r = evaluate_parameters(k, p);
      if (r.pass && r.gain->rho < best_rho) {
        best_rho = r.gain->rho;
        best = std::move(p);
      }
    }
  }
  if (!best) throw FeasibilityError("no feasible point on the parameter grid");
  return *best;
}

}  // namespace dnehb
