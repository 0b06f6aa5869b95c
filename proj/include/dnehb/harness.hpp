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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnehb/config.hpp"
#include "dnehb/diagnostics.hpp"
#include "dnehb/gain.hpp"
#include "dnehb/solver.hpp"

namespace dnehb {

enum class Algorithm { kDneHb, kDne };

std::string_view algorithm_name(Algorithm a);   // "DNE-HB", "DNE"
std::string_view algorithm_token(Algorithm a);  // "dne-hb", "dne"

struct IterationRecord {
  std::size_t k = 0;
  double consensus_error = 0.0;
  double ne_residual = 0.0;
  LyapunovVector v;
  // Transition k -> k+1; NaN (and checks_pass = true) on the final record.
  double c_k = 0.0;
  std::array<double, 3> slack{};
  std::array<double, 3> matrix_slack{};
  bool checks_pass = true;
  bool metric_convention_suspect = false;
};

/// Feasibility of one (seed, parameters) pair, evaluated on the schedule
/// prefix the runs of that seed actually used.
struct FeasibilityOutcome {
  std::size_t horizon = 0;
  ScheduleConstants network;
  std::optional<FeasibilityReport> report;
  std::string error;  // set when the constants could not be computed

  bool pass() const { return report && report->pass; }
};

struct RunRecord {
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::kDneHb;
  SolverParams params;
  std::size_t iterations = 0;
  bool converged = false;
  double consensus_error = 0.0;
  double ne_residual = 0.0;
  double wall_seconds = 0.0;
  std::vector<IterationRecord> trace;     // iterations + 1 entries when traced
  std::vector<double> consensus_series;   // kept for plot seeds
  std::vector<double> residual_series;
  std::shared_ptr<const FeasibilityOutcome> feasibility;
};

struct RunOptions {
  bool baseline = true;  // also run DNE (all beta_i = 0)
};

/// Per seed: build the instance (sampled from the seed unless the config
/// names a saved game), the graph schedule and the initial state, then run
/// DNE-HB and DNE from the same initial state on the same graphs until the
/// consensus error drops below epsilon or the iteration cap is reached.
/// Records are ordered by seed, DNE-HB before DNE. Seeds run concurrently.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct SummaryRow {
  Algorithm algorithm = Algorithm::kDneHb;
  double alpha = 0.0;  // max alpha_i
  double beta = 0.0;   // max beta_i
  std::size_t runs = 0;
  std::size_t converged = 0;
  double mean_iterations = 0.0;
  double mean_consensus_error = 0.0;
  double mean_ne_residual = 0.0;
  double mean_wall_seconds = 0.0;
  double iteration_ratio = 0.0;  // mean iterations over the DNE mean at the same alpha; NaN without one
  std::size_t feasible = 0;
};

/// Groups by (algorithm, alpha, beta) in order of first appearance. Throws
/// InputError for empty input.
std::vector<SummaryRow> summarize(std::span<const RunRecord> records);

/// Writes summary.csv, runs.csv, timing.csv, feasibility.txt and
/// plotdata_convergence.csv, plus trace_<seed>_<algo>.csv for traced runs.
/// Wall-clock times appear only in timing.csv, so every other file is
/// reproducible byte for byte. Throws IoError when a file cannot be written.
void emit_outputs(std::span<const RunRecord> records, const std::filesystem::path& out_dir);

struct SweepResult {
  std::string param;  // "alpha" or "beta"
  std::vector<double> values;
  std::vector<std::vector<RunRecord>> runs;  // one batch per value
};

/// Reruns the experiment with a uniform alpha or beta per value. For a beta
/// sweep the baseline is run only with the first value.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values);

/// Writes summary_sweep.csv and plotdata_sweep.csv to out_dir and each
/// batch's outputs to out_dir/<param>_<value>.
void emit_sweep(const SweepResult& sweep, const std::filesystem::path& out_dir);

}  // namespace dnehb
