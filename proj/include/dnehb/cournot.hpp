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
#include <filesystem>
#include <span>
#include <vector>

#include "dnehb/game.hpp"
#include "dnehb/types.hpp"
#include "json.hpp"

namespace dnehb {

/// One firm of a Nash-Cournot game. Production variable a is delivered to
/// market `markets[a]`, i.e. column a of B_i is the unit vector e_{markets[a]}.
struct CournotFirm {
  std::vector<std::size_t> markets;
  Eigen::MatrixXd Q;  // symmetric positive definite, n_i x n_i
  Vector q;
};

/// Firms i = 0..m-1 selling into N markets with linear inverse demand
/// p(x) = P_bar - Xi B x and quadratic production cost x_i' Q_i x_i + q_i' x_i.
/// Firm i minimizes J_i(x) = c_i(x_i) - p(x)' B_i x_i.
class CournotInstance {
 public:
  CournotInstance(std::size_t markets, std::vector<CournotFirm> firms, Vector price_intercepts,
                  Vector price_slopes);

  std::size_t firms() const { return firms_.size(); }
  std::size_t markets() const { return markets_; }
  std::size_t dimension() const { return layout_.total(); }
  const BlockLayout& layout() const { return layout_; }
  const CournotFirm& firm(std::size_t i) const { return firms_[i]; }
  const Vector& price_intercepts() const { return price_intercepts_; }
  const Vector& price_slopes() const { return price_slopes_; }

  /// Closed form grad_i J_i = 2 Q_i x_i + q_i - B_i'(P_bar - Xi B x) + B_i' Xi B_i x_i.
  void gradient(std::size_t i, std::span<const double> x, std::span<double> grad) const;
  double cost(std::size_t i, const Vector& x) const;

 private:
  std::size_t markets_;
  std::vector<CournotFirm> firms_;
  Vector price_intercepts_;
  Vector price_slopes_;
  BlockLayout layout_;
  std::vector<std::size_t> var_market_;  // market of each joint-action variable
};

/// The Cournot game mapping is affine: F(x) = Lambda x + b.
struct AffineMap {
  Eigen::MatrixXd Lambda;
  Vector b;
};

AffineMap cournot_affine_map(const CournotInstance& inst);

Vector cournot_gradient(const CournotInstance& inst, std::size_t i, const Vector& x);

/// mu = lambda_min((Lambda + Lambda')/2), L_i = ||Lambda_ii||_2 and
/// L_-i = ||[Lambda_ij]_{j != i}||_2. Throws ComputationError when mu <= 0.
GameConstants cournot_constants(const CournotInstance& inst);

/// Unique NE from Lambda x* = -b (partial-pivot LU).
Vector solve_ne(const CournotInstance& inst);

/// Wraps the instance as a generic game; constants come from cournot_constants.
GameInstance make_game(const CournotInstance& inst);

/// Sampling ranges for random instances. Q_i is diagonal.
struct CournotSampling {
  std::size_t firms = 20;
  std::size_t markets = 7;
  std::size_t dimension = 32;  // sum of n_i
  double q_diag_lo = 5.0, q_diag_hi = 8.0;
  double q_lin_lo = 1.0, q_lin_hi = 2.0;
  double intercept_lo = 10.0, intercept_hi = 20.0;
  double slope_lo = 0.01, slope_hi = 0.02;
};

/// Draws an instance from stream streams::kInstance of `seed`.
///
/// Draw order: (1) every firm starts with n_i = 1 and each of the remaining
/// dimension - m units goes to a firm picked uniformly among those with
/// n_i < N; (2) per firm, a partial Fisher-Yates shuffle of 0..N-1 picks its
/// n_i markets; (3) per firm, Q_i diagonal then q_i; (4) P_bar; (5) chi.
CournotInstance sample_cournot(const CournotSampling& spec, std::uint64_t seed);

nlohmann::json to_json(const CournotInstance& inst);
CournotInstance cournot_from_json(const nlohmann::json& doc);
void save_cournot(const CournotInstance& inst, const std::filesystem::path& path);
CournotInstance load_cournot(const std::filesystem::path& path);

}  // namespace dnehb
