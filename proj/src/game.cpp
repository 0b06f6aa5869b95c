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

#include "dnehb/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dnehb/errors.hpp"

namespace dnehb {

double GameConstants::max_own() const {
  return own_lipschitz.empty() ? 0.0 : *std::ranges::max_element(own_lipschitz);
}

double GameConstants::max_cross() const {
  return cross_lipschitz.empty() ? 0.0 : *std::ranges::max_element(cross_lipschitz);
}

double GameConstants::combined() const { return std::hypot(max_own(), max_cross()); }

BlockLayout::BlockLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  offsets_.reserve(dims_.size() + 1);
  for (std::size_t d : dims_) offsets_.push_back(offsets_.back() + d);
}

GameInstance::GameInstance(std::vector<std::size_t> dims, GradientOracle oracle,
                           GameConstants constants)
    : layout_(std::move(dims)), oracle_(std::move(oracle)), constants_(std::move(constants)) {
  const std::size_t m = layout_.agents();
  if (m == 0) throw InputError("game needs at least one agent");
  for (std::size_t d : layout_.dims()) {
    if (d == 0) throw InputError("every agent needs a non-empty action");
  }
  if (!oracle_) throw InputError("game needs a gradient oracle");
  if (constants_.own_lipschitz.size() != m || constants_.cross_lipschitz.size() != m) {
    throw InputError("game constants must list one L_i and one L_-i per agent");
  }
  if (!(constants_.mu > 0.0)) throw InputError("strong monotonicity constant must be positive");
  for (std::size_t i = 0; i < m; ++i) {
    double li = constants_.own_lipschitz[i];
    double lmi = constants_.cross_lipschitz[i];
    if (!(li > 0.0) || !(lmi >= 0.0)) {
      throw InputError("agent " + std::to_string(i) + ": need L_i > 0 and L_-i >= 0");
    }
    // Strong monotonicity of F forces mu-strong convexity of each J_i in x_i.
    if (constants_.mu > li * (1.0 + 1e-12)) {
      throw InputError("agent " + std::to_string(i) + ": mu exceeds L_i");
    }
  }
}

void GameInstance::gradient(std::size_t agent, std::span<const double> x,
                            std::span<double> grad) const {
  if (agent >= agents()) throw InputError("agent index out of range");
  if (x.size() != dimension()) throw InputError("joint action has the wrong length");
  if (grad.size() != layout_.dim(agent)) throw InputError("gradient buffer has the wrong length");
  oracle_(agent, x, grad);
}

Vector GameInstance::gradient(std::size_t agent, const Vector& x) const {
  if (agent >= agents()) throw InputError("agent index out of range");
  Vector g(static_cast<Eigen::Index>(layout_.dim(agent)));
  gradient(agent, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
           std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return g;
}

Vector GameInstance::game_mapping(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw InputError("joint action has the wrong length");
  }
  Vector f(x.size());
  std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < agents(); ++i) {
    gradient(i, xs, std::span<double>(f.data() + layout_.offset(i), layout_.dim(i)));
  }
  return f;
}

}  // namespace dnehb
