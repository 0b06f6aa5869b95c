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

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "dnehb/config.hpp"
#include "dnehb/cournot.hpp"
#include "dnehb/errors.hpp"
#include "dnehb/gain.hpp"
#include "dnehb/harness.hpp"
#include "dnehb/network.hpp"

namespace {

using dnehb::ExperimentConfig;

dnehb::CournotInstance instance_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.game_path ? dnehb::load_cournot(*cfg.game_path) : dnehb::sample_cournot(cfg.sampling, seed);
}

void report_batch(const std::vector<dnehb::RunRecord>& records, std::optional<double>* baseline = nullptr) {
  for (const dnehb::SummaryRow& r : dnehb::summarize(records)) {
    double ratio = r.iteration_ratio;
    if (baseline) {
      if (r.algorithm == dnehb::Algorithm::kDne) *baseline = r.mean_iterations;
      if (std::isnan(ratio) && *baseline) ratio = r.mean_iterations / **baseline;
    }
    std::cout << fmt::format("{:7} alpha={} beta={} runs={} converged={} mean_iterations={} ratio={}\n",
                             dnehb::algorithm_name(r.algorithm), r.alpha, r.beta, r.runs, r.converged,
                             r.mean_iterations, ratio);
  }
  std::size_t infeasible = 0;
  std::size_t failed_checks = 0;
  for (const dnehb::RunRecord& r : records) {
    const bool feasible = r.feasibility && r.feasibility->pass();
    infeasible += feasible ? 0 : 1;
    for (const dnehb::IterationRecord& it : r.trace) {
      if (feasible && !it.checks_pass) ++failed_checks;
    }
  }
  if (infeasible > 0) {
    std::cerr << fmt::format("warning: {} of {} runs use parameters outside the certified region\n", infeasible,
                             records.size());
  }
  if (failed_checks > 0) {
    std::cerr << fmt::format("warning: {} traced transitions of feasible runs violate a Lyapunov bound\n",
                             failed_checks);
  }
}

int cmd_validate(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.seeds.front();
  const dnehb::CournotInstance inst = instance_for(cfg, seed);
  const dnehb::GameConstants gc = dnehb::cournot_constants(inst);
  const std::size_t m = inst.firms();
  const dnehb::SolverParams params{dnehb::per_agent(cfg.alpha, m, "alpha"), dnehb::per_agent(cfg.beta, m, "beta")};
  const dnehb::WeightSchedule ws =
      dnehb::build_weights(dnehb::ScheduleGenerator(m, cfg.density, seed), cfg.horizon);
  const dnehb::BoundConstants bc = dnehb::bound_constants(dnehb::schedule_constants(ws), gc);

  std::cout << fmt::format("seed {} schedule horizon {}\n", seed, cfg.horizon);
  const dnehb::FeasibilityReport report = dnehb::evaluate_parameters(bc, params);
  std::cout << dnehb::format_report(report);
  if (!report.structural) {
    std::cout << "structurally infeasible: sigma mu <= sqrt(2) L2\n";
    return 1;
  }
  try {
    const dnehb::SolverParams best = dnehb::suggest_parameters(bc, m);
    const dnehb::FeasibilityReport r = dnehb::validate_parameters(bc, best);
    std::cout << fmt::format("suggested: alpha = {} beta = {} rho_M = {}\n", best.alpha_max(), best.beta_max(),
                             r.rho());
  } catch (const dnehb::FeasibilityError& e) {
    std::cout << "no suggestion: " << e.what() << '\n';
  }
  return report.pass ? 0 : 2;
}

int cmd_export(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const std::uint64_t seed = cfg.seeds.front();
  const dnehb::CournotInstance inst = instance_for(cfg, seed);
  std::filesystem::create_directories(out_dir);
  dnehb::save_cournot(inst, out_dir / fmt::format("game_{}.json", seed));
  const auto edges_path = out_dir / fmt::format("graphs_{}.txt", seed);
  std::ofstream edges(edges_path);
  if (!edges) throw dnehb::IoError("cannot write " + edges_path.string());
  dnehb::write_edge_list(edges, dnehb::generate_schedule(inst.firms(), cfg.horizon, cfg.density, seed));
  std::cout << "wrote " << (out_dir / fmt::format("game_{}.json", seed)).string() << " and " << edges_path.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed heavy-ball Nash equilibrium seeking over time-varying digraphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t seeds = 0;
  bool trace = false;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run DNE-HB and DNE over a batch of seeds");
  run->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "number of seeds (overrides the config)");
  run->add_flag("--trace", trace, "write per-iteration traces");
  run->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "print the step-size feasibility report");
  validate->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);

  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "rerun the batch for several alpha or beta values");
  sweep->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "parameter to vary")->required()->check(CLI::IsMember({"alpha", "beta"}));
  sweep->add_option("--values", values, "values to try")->required()->delimiter(',');
  sweep->add_option("--seeds", seeds, "number of seeds (overrides the config)");
  sweep->add_flag("--trace", trace, "write per-iteration traces");
  sweep->add_option("--out", out_dir, "output directory");

  auto* exp = app.add_subcommand("export", "save the first seed's game and graph schedule");
  exp->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? 0 : 64;
  }

  try {
    ExperimentConfig cfg = dnehb::load_config(config_path);
    if (seeds > 0) cfg.seeds = ExperimentConfig::default_seeds(seeds, cfg.seed_offset);
    if (trace) cfg.trace = true;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    if (*validate) return cmd_validate(cfg);
    if (*exp) return cmd_export(cfg, cfg.out_dir);
    if (*run) {
      const auto records = dnehb::run_experiment(cfg);
      dnehb::emit_outputs(records, cfg.out_dir);
      report_batch(records);
      std::cout << "outputs in " << cfg.out_dir.string() << '\n';
      return 0;
    }
    const dnehb::SweepResult result = dnehb::run_sweep(cfg, param, values);
    dnehb::emit_sweep(result, cfg.out_dir);
    std::optional<double> baseline;
    for (std::size_t i = 0; i < result.values.size(); ++i) {
      std::cout << fmt::format("{} = {}\n", param, result.values[i]);
      report_batch(result.runs[i], param == "beta" ? &baseline : nullptr);
    }
    std::cout << "outputs in " << cfg.out_dir.string() << '\n';
    return 0;
  } catch (const dnehb::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 64;
  } catch (const dnehb::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 74;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 70;
  }
}
