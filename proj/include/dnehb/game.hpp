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
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dnehb/types.hpp"

namespace dnehb {

/// Strong-monotonicity and Lipschitz constants of a game mapping.
///
/// `own_lipschitz[i]` bounds how fast agent i's partial gradient moves with
/// its own action, `cross_lipschitz[i]` how fast it moves with everybody
/// else's.
struct GameConstants {
  double mu = 0.0;
  std::vector<double> own_lipschitz;
  std::vector<double> cross_lipschitz;

  double max_own() const;    // L1
  double max_cross() const;  // L2
  double combined() const;   // sqrt(L1^2 + L2^2)
};

/// Contiguous placement of each agent's action block inside a joint action.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<std::size_t> dims);

  std::size_t agents() const { return dims_.size(); }
  std::size_t total() const { return offsets_.back(); }
  std::size_t dim(std::size_t i) const { return dims_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  const std::vector<std::size_t>& dims() const { return dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_{0};
};

/// Writes grad_i J_i(x) into `grad` (length n_i) for a joint action x.
using GradientOracle =
    std::function<void(std::size_t agent, std::span<const double> x, std::span<double> grad)>;

/// An unconstrained m-player game: per-agent partial gradients plus the
/// constants the convergence theory needs. Immutable once built.
class GameInstance {
 public:
  GameInstance(std::vector<std::size_t> dims, GradientOracle oracle, GameConstants constants);

  std::size_t agents() const { return layout_.agents(); }
  std::size_t dimension() const { return layout_.total(); }
  const BlockLayout& layout() const { return layout_; }
  const GameConstants& constants() const { return constants_; }

  void gradient(std::size_t agent, std::span<const double> x, std::span<double> grad) const;
  Vector gradient(std::size_t agent, const Vector& x) const;

  /// F(x) = [grad_1 J_1(x); ...; grad_m J_m(x)].
  Vector game_mapping(const Vector& x) const;

 private:
  BlockLayout layout_;
  GradientOracle oracle_;
  GameConstants constants_;
};

}  // namespace dnehb
