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

#include <cmath>
#include <cstddef>

#include "dnehb/gain.hpp"
#include "dnehb/rng.hpp"
#include "dnehb/solver.hpp"

namespace dnehb::testing {

struct GainDraw {
  BoundConstants constants;
  SolverParams params;
};

/// Random constants with sigma mu > sqrt(2) L2 most of the time and step-sizes
/// spread over five decades below 2 / (L1 + mu). Momentum is drawn around the
/// stated beta bound so that both sides of it are exercised.
inline GainDraw random_gain_draw(Rng& rng) {
  GainDraw d;
  BoundConstants& k = d.constants;
  k.c = rng.uniform(0.01, 0.999);
  k.sigma = std::pow(10.0, rng.uniform(-3.0, std::log10(0.5)));
  k.phi = rng.uniform(1.0, 1.0 / std::sqrt(k.sigma));
  k.mu = std::pow(10.0, rng.uniform(-1.0, 1.3));
  k.L1 = k.mu * (1.0 + std::pow(10.0, rng.uniform(-2.0, 2.0)));
  k.L2 = rng.uniform(0.0, 1.5 * k.sigma * k.mu / std::sqrt(2.0));
  const double a = 2.0 / (k.L1 + k.mu) * std::pow(10.0, rng.uniform(-5.0, 0.0));
  const double al = a * rng.uniform(0.3, 1.0);
  const double eta = (al * k.sigma * k.mu - a * std::sqrt(2.0) * k.L2) / a;
  const double bound = eta > 0.0 ? eta * (1.0 - k.c) / ((2.0 - k.c) * (eta + k.L())) : 0.1;
  const double b = bound * rng.uniform(0.0, 1.2);
  d.params = SolverParams{{a, al, 0.5 * (a + al)}, {b, 0.0, 0.5 * b}};
  return d;
}

}  // namespace dnehb::testing
