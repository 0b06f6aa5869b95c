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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnehb/cournot.hpp"

namespace dnehb {

/// Experiment description. Read from a flat `key = value` file; '#' starts a
/// comment. Recognized keys:
///
///   game            path to a saved Cournot instance (JSON); otherwise one
///                   instance is sampled per seed
///   firms, markets, dimension
///   q_diag, q_linear, price_intercept, price_slope   "lo, hi" ranges
///   alpha, beta     one value for every agent or a comma-separated list
///   density         extra-edge probability of the random graphs
///   epsilon         consensus-error threshold
///   max_iterations
///   seeds           seed count, seeds are seed_offset .. seed_offset+count-1
///   seed_offset
///   seed_list       explicit comma-separated seeds (overrides seeds)
///   trace           true/false
///   plot_seeds      number of leading seeds whose residual curves are kept
///   horizon         schedule length used by `validate`
///   feasibility_horizon_cap   longest schedule used for feasibility reports
///   out             output directory
struct ExperimentConfig {
  std::optional<std::filesystem::path> game_path;
  CournotSampling sampling;
  std::vector<double> alpha{0.01};
  std::vector<double> beta{0.5};
  double density = 0.1;
  double epsilon = 1e-5;
  std::size_t max_iterations = 100000;
  std::vector<std::uint64_t> seeds = default_seeds(100, 0);
  std::uint64_t seed_offset = 0;
  bool trace = false;
  std::size_t plot_seeds = 1;
  std::size_t horizon = 2000;
  std::size_t feasibility_horizon_cap = 20000;
  std::filesystem::path out_dir = "results";

  static std::vector<std::uint64_t> default_seeds(std::size_t count, std::uint64_t offset);

  /// Throws InputError on an invalid combination.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// alpha/beta expanded to one entry per agent.
std::vector<double> per_agent(const std::vector<double>& values, std::size_t agents, const char* what);

}  // namespace dnehb
