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
#include <vector>

#include "dnehb/cournot.hpp"
#include "dnehb/game.hpp"
#include "dnehb/network.hpp"
#include "dnehb/rng.hpp"
#include "dnehb/types.hpp"

namespace dnehb::testing {

/// J_i(x) = ||x_i - a_i||^2 with block sizes `dims`.
inline GameInstance decoupled_game(const Vector& a, std::vector<std::size_t> dims) {
  const BlockLayout layout(dims);
  GradientOracle oracle = [a, layout](std::size_t i, std::span<const double> x, std::span<double> g) {
    for (std::size_t t = 0; t < layout.dim(i); ++t) {
      const std::size_t idx = layout.offset(i) + t;
      g[t] = 2.0 * (x[idx] - a[static_cast<Eigen::Index>(idx)]);
    }
  };
  const std::size_t m = dims.size();
  return GameInstance(std::move(dims), oracle,
                      GameConstants{2.0, std::vector<double>(m, 2.0), std::vector<double>(m, 0.0)});
}

/// Two firms in one market: Q_i = [1], q_i = [0], P_bar = [10], chi = [1].
inline CournotInstance cournot_pair() {
  std::vector<CournotFirm> firms(2);
  for (auto& f : firms) {
    f.markets = {0};
    f.Q = Eigen::MatrixXd::Identity(1, 1);
    f.q = Vector::Zero(1);
  }
  return CournotInstance(1, firms, Vector::Constant(1, 10.0), Vector::Constant(1, 1.0));
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline RowMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  RowMatrix z(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) z(i, j) = rng.normal();
  }
  return z;
}

/// Positive stochastic vector.
inline Vector random_stochastic(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 0.05 + rng.uniform();
  return v / v.sum();
}

inline CournotInstance small_cournot(std::size_t firms, std::size_t markets, std::size_t dimension,
                                     std::uint64_t seed) {
  CournotSampling spec;
  spec.firms = firms;
  spec.markets = markets;
  spec.dimension = dimension;
  return sample_cournot(spec, seed);
}

/// Strongly connected digraph with self-loops, by rejection sampling of
/// Bernoulli(p) off-diagonal edges.
inline Digraph random_strongly_connected(Rng& rng, std::size_t m, double p) {
  for (;;) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m; ++i) edges.push_back({i, i});
    for (std::size_t from = 0; from < m; ++from) {
      for (std::size_t to = 0; to < m; ++to) {
        if (from != to && rng.bernoulli(p)) edges.push_back({from, to});
      }
    }
    Digraph g(m, std::move(edges));
    if (is_strongly_connected(g)) return g;
  }
}

/// Row-stochastic W supported exactly on the in-neighbors of g, with random
/// positive weights.
inline RowMatrix random_compatible_weights(Rng& rng, const Digraph& g) {
  const auto m = static_cast<Eigen::Index>(g.nodes());
  RowMatrix w = RowMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t j : g.in_neighbors(static_cast<std::size_t>(i))) {
      w(i, static_cast<Eigen::Index>(j)) = 0.1 + rng.uniform();
    }
    w.row(i) /= w.row(i).sum();
  }
  return w;
}

}  // namespace dnehb::testing
