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

#include "dnehb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "dnehb/cournot.hpp"
#include "dnehb/errors.hpp"

namespace dnehb {

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::kDneHb ? "DNE-HB" : "DNE"; }
std::string_view algorithm_token(Algorithm a) { return a == Algorithm::kDneHb ? "dne-hb" : "dne"; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Mixing matrices of one seed's schedule, generated on first use and shared
/// by the runs of that seed. Only the first kLimit are retained.
class WeightCache {
 public:
  explicit WeightCache(const ScheduleGenerator& gen) : gen_(gen) {}

  const MixingMatrix& at(std::size_t k) {
    if (k < kept_.size()) return kept_[k];
    if (k == kept_.size() && kept_.size() < kLimit) {
      kept_.push_back(MixingMatrix::equal_in_neighbor(gen_.graph(k)));
      return kept_.back();
    }
    scratch_ = MixingMatrix::equal_in_neighbor(gen_.graph(k));
    return scratch_;
  }

 private:
  static constexpr std::size_t kLimit = 50000;
  const ScheduleGenerator& gen_;
  std::vector<MixingMatrix> kept_;
  MixingMatrix scratch_;
};

struct SeedContext {
  const GameInstance& game;
  const Vector& x_star;
  const SolverState& initial;
  WeightCache& weights;
  const ExperimentConfig& cfg;
  bool keep_series;
};

RunRecord run_once(const SeedContext& ctx, Algorithm algorithm, const SolverParams& params, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  rec.algorithm = algorithm;
  rec.params = params;
  const BlockLayout& layout = ctx.game.layout();
  SolverState s = ctx.initial;
  StepWorkspace ws;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0;; ++k) {
    const double ce = consensus_error(s.z);
    if (ctx.keep_series) {
      rec.consensus_series.push_back(ce);
      rec.residual_series.push_back((s.actions(layout) - ctx.x_star).norm());
    }
    if (ce < ctx.cfg.epsilon || k == ctx.cfg.max_iterations) {
      rec.iterations = k;
      rec.converged = ce < ctx.cfg.epsilon;
      rec.consensus_error = ce;
      break;
    }
    advance(s, params, ctx.game, ctx.weights.at(k), ws);
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.ne_residual = (s.actions(layout) - ctx.x_star).norm();
  return rec;
}

void replay_trace(const SeedContext& ctx, const WeightSchedule& schedule, RunRecord& rec) {
  const BlockLayout& layout = ctx.game.layout();
  const GameConstants& gc = ctx.game.constants();
  CheckOptions opts;
  if (rec.feasibility && rec.feasibility->report && rec.feasibility->report->gain) {
    opts.global_gain = rec.feasibility->report->gain->M;
  }
  SolverState cur = ctx.initial;
  StepWorkspace ws;
  rec.trace.reserve(rec.iterations + 1);
  for (std::size_t k = 0; k <= rec.iterations; ++k) {
    IterationRecord ir;
    ir.k = k;
    ir.consensus_error = consensus_error(cur.z);
    ir.ne_residual = (cur.actions(layout) - ctx.x_star).norm();
    ir.v = lyapunov(cur, schedule.pi[k], ctx.x_star);
    if (k == rec.iterations) {
      ir.c_k = kNaN;
      ir.slack = {kNaN, kNaN, kNaN};
      ir.matrix_slack = {kNaN, kNaN, kNaN};
    } else {
      SolverState next = cur;
      advance(next, rec.params, ctx.game, schedule.weights[k], ws);
      const PropositionCheck pc = check_transition(cur, next, schedule, gc, rec.params, ctx.x_star, opts);
      ir.c_k = pc.gain.c_k;
      ir.slack = pc.slack;
      ir.matrix_slack = pc.matrix_slack;
      ir.checks_pass = pc.pass;
      ir.metric_convention_suspect = pc.metric_convention_suspect;
      cur = std::move(next);
    }
    rec.trace.push_back(ir);
  }
}

std::shared_ptr<const FeasibilityOutcome> feasibility_for(const WeightSchedule* schedule,
                                                         const ScheduleConstants* network,
                                                         const std::string& network_error, std::size_t horizon,
                                                         const GameConstants& gc, const SolverParams& params) {
  auto out = std::make_shared<FeasibilityOutcome>();
  out->horizon = horizon;
  if (!schedule || !network) {
    out->error = network_error;
    return out;
  }
  out->network = *network;
  try {
    out->report = evaluate_parameters(bound_constants(*network, gc), params);
  } catch (const std::exception& e) {
    out->error = e.what();
  }
  return out;
}

std::vector<RunRecord> run_seed(const ExperimentConfig& cfg, const RunOptions& options,
                                const std::shared_ptr<const CournotInstance>& shared, std::uint64_t seed,
                                bool keep_series) {
  const CournotInstance inst = shared ? *shared : sample_cournot(cfg.sampling, seed);
  const GameInstance game = make_game(inst);
  const Vector x_star = solve_ne(inst);
  const std::size_t m = game.agents();
  const SolverParams hb{per_agent(cfg.alpha, m, "alpha"), per_agent(cfg.beta, m, "beta")};
  const SolverParams dne{hb.alpha, std::vector<double>(m, 0.0)};
  hb.check(m);

  const ScheduleGenerator gen(m, cfg.density, seed);
  WeightCache cache(gen);
  const SolverState initial = random_initial_state(game, seed);
  const SeedContext ctx{game, x_star, initial, cache, cfg, keep_series};

  std::vector<RunRecord> out;
  out.push_back(run_once(ctx, Algorithm::kDneHb, hb, seed));
  if (options.baseline) out.push_back(run_once(ctx, Algorithm::kDne, dne, seed));

  std::size_t used = 1;
  for (const RunRecord& r : out) used = std::max(used, r.iterations);
  const std::size_t horizon = cfg.trace ? used : std::min(used, cfg.feasibility_horizon_cap);

  std::optional<WeightSchedule> schedule;
  std::optional<ScheduleConstants> network;
  std::string network_error;
  try {
    schedule = build_weights(gen, horizon);
    network = schedule_constants(*schedule);
  } catch (const ComputationError& e) {
    network_error = e.what();
  }
  for (RunRecord& r : out) {
    r.feasibility = feasibility_for(schedule ? &*schedule : nullptr, network ? &*network : nullptr, network_error,
                                    horizon, game.constants(), r.params);
    if (cfg.trace && schedule) replay_trace(ctx, *schedule, r);
  }
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::shared_ptr<const CournotInstance> shared;
  if (cfg.game_path) shared = std::make_shared<const CournotInstance>(load_cournot(*cfg.game_path));

  const std::size_t count = cfg.seeds.size();
  std::vector<std::vector<RunRecord>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      slots[idx] = run_seed(cfg, options, shared, cfg.seeds[idx], idx < cfg.plot_seeds);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunRecord> records;
  for (auto& slot : slots) {
    for (auto& r : slot) records.push_back(std::move(r));
  }
  return records;
}

std::vector<SummaryRow> summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw InputError("no run records to summarize");
  std::vector<SummaryRow> rows;
  std::map<std::tuple<int, double, double>, std::size_t> index;
  for (const RunRecord& r : records) {
    const auto key = std::make_tuple(static_cast<int>(r.algorithm), r.params.alpha_max(), r.params.beta_max());
    auto [it, inserted] = index.emplace(key, rows.size());
    if (inserted) {
      SummaryRow row;
      row.algorithm = r.algorithm;
      row.alpha = std::get<1>(key);
      row.beta = std::get<2>(key);
      rows.push_back(row);
    }
    SummaryRow& row = rows[it->second];
    ++row.runs;
    row.converged += r.converged ? 1 : 0;
    row.feasible += (r.feasibility && r.feasibility->pass()) ? 1 : 0;
    row.mean_iterations += static_cast<double>(r.iterations);
    row.mean_consensus_error += r.consensus_error;
    row.mean_ne_residual += r.ne_residual;
    row.mean_wall_seconds += r.wall_seconds;
  }
  for (SummaryRow& row : rows) {
    const auto n = static_cast<double>(row.runs);
    row.mean_iterations /= n;
    row.mean_consensus_error /= n;
    row.mean_ne_residual /= n;
    row.mean_wall_seconds /= n;
  }
  for (SummaryRow& row : rows) {
    row.iteration_ratio = kNaN;
    for (const SummaryRow& base : rows) {
      if (base.algorithm == Algorithm::kDne && base.alpha == row.alpha && base.mean_iterations > 0.0) {
        row.iteration_ratio = row.mean_iterations / base.mean_iterations;
        break;
      }
    }
  }
  return rows;
}

void emit_outputs(std::span<const RunRecord> records, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const std::vector<SummaryRow> rows = summarize(records);

  {
    const auto path = out_dir / "summary.csv";
    auto out = open_output(path);
    out << "algorithm,alpha,beta,runs,converged,feasible,mean_iterations,mean_consensus_error,"
           "mean_ne_residual,iteration_ratio\n";
    for (const SummaryRow& r : rows) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", algorithm_name(r.algorithm), num(r.alpha),
                         num(r.beta), r.runs, r.converged, r.feasible, num(r.mean_iterations),
                         num(r.mean_consensus_error), num(r.mean_ne_residual), num(r.iteration_ratio));
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "timing.csv";
    auto out = open_output(path);
    out << "algorithm,alpha,beta,runs,mean_wall_seconds\n";
    for (const SummaryRow& r : rows) {
      out << fmt::format("{},{},{},{},{}\n", algorithm_name(r.algorithm), num(r.alpha), num(r.beta), r.runs,
                         num(r.mean_wall_seconds));
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "runs.csv";
    auto out = open_output(path);
    out << "seed,algorithm,alpha,beta,iterations,converged,consensus_error,ne_residual,feasible\n";
    for (const RunRecord& r : records) {
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.seed, algorithm_name(r.algorithm),
                         num(r.params.alpha_max()), num(r.params.beta_max()), r.iterations, r.converged ? 1 : 0,
                         num(r.consensus_error), num(r.ne_residual),
                         (r.feasibility && r.feasibility->pass()) ? 1 : 0);
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "feasibility.txt";
    auto out = open_output(path);
    for (const RunRecord& r : records) {
      out << fmt::format("== seed {} {} alpha_max = {} beta_max = {}\n", r.seed, algorithm_name(r.algorithm),
                         num(r.params.alpha_max()), num(r.params.beta_max()));
      if (!r.feasibility) {
        out << "not evaluated\n";
      } else {
        out << fmt::format("schedule horizon: {}\n", r.feasibility->horizon);
        if (r.feasibility->report) out << format_report(*r.feasibility->report);
        if (!r.feasibility->error.empty()) out << "error: " << r.feasibility->error << '\n';
        if (!r.feasibility->pass()) {
          out << "warning: parameters are outside the certified region; the run was carried out anyway\n";
        }
      }
      out << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "plotdata_convergence.csv";
    auto out = open_output(path);
    out << "algorithm,alpha,beta,seed,k,consensus_error,ne_residual\n";
    for (const RunRecord& r : records) {
      for (std::size_t k = 0; k < r.consensus_series.size(); ++k) {
        out << fmt::format("{},{},{},{},{},{},{}\n", algorithm_name(r.algorithm), num(r.params.alpha_max()),
                           num(r.params.beta_max()), r.seed, k, num(r.consensus_series[k]),
                           num(r.residual_series[k]));
      }
    }
    finish(out, path);
  }
  for (const RunRecord& r : records) {
    if (r.trace.empty()) continue;
    const auto path = out_dir / fmt::format("trace_{}_{}.csv", r.seed, algorithm_token(r.algorithm));
    auto out = open_output(path);
    out << "k,consensus_error,ne_residual,v1,v2,v3,c_k,slack1,slack2,slack3,checks_pass\n";
    for (const IterationRecord& it : r.trace) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", it.k, num(it.consensus_error), num(it.ne_residual),
                         num(it.v.v1), num(it.v.v2), num(it.v.v3), num(it.c_k), num(it.slack[0]),
                         num(it.slack[1]), num(it.slack[2]), it.checks_pass ? 1 : 0);
    }
    finish(out, path);
  }
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values) {
  if (param != "alpha" && param != "beta") throw InputError("sweep parameter must be alpha or beta");
  if (values.empty()) throw InputError("sweep needs at least one value");
  SweepResult sweep{param, values, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = cfg;
    (param == "alpha" ? c.alpha : c.beta) = {values[i]};
    sweep.runs.push_back(run_experiment(c, RunOptions{param == "alpha" || i == 0}));
  }
  return sweep;
}

void emit_sweep(const SweepResult& sweep, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  {
    const auto path = out_dir / "summary_sweep.csv";
    auto out = open_output(path);
    out << "param,value,algorithm,alpha,beta,runs,converged,mean_iterations,iteration_ratio\n";
    std::optional<double> baseline;
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
      for (const SummaryRow& r : summarize(sweep.runs[i])) {
        double ratio = r.iteration_ratio;
        if (r.algorithm == Algorithm::kDne && sweep.param == "beta") baseline = r.mean_iterations;
        if (std::isnan(ratio) && baseline && sweep.param == "beta") ratio = r.mean_iterations / *baseline;
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", sweep.param, num(sweep.values[i]),
                           algorithm_name(r.algorithm), num(r.alpha), num(r.beta), r.runs, r.converged,
                           num(r.mean_iterations), num(ratio));
      }
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "plotdata_sweep.csv";
    auto out = open_output(path);
    out << "param,value,algorithm,seed,k,consensus_error,ne_residual\n";
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
      for (const RunRecord& r : sweep.runs[i]) {
        for (std::size_t k = 0; k < r.consensus_series.size(); ++k) {
          out << fmt::format("{},{},{},{},{},{},{}\n", sweep.param, num(sweep.values[i]),
                             algorithm_name(r.algorithm), r.seed, k, num(r.consensus_series[k]),
                             num(r.residual_series[k]));
        }
      }
    }
    finish(out, path);
  }
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    emit_outputs(sweep.runs[i], out_dir / fmt::format("{}_{}", sweep.param, num(sweep.values[i])));
  }
}

}  // namespace dnehb
