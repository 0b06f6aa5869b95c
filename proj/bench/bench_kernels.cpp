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

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>
#include <fmt/format.h>

#include "dnehb/config.hpp"
#include "dnehb/cournot.hpp"
#include "dnehb/harness.hpp"
#include "dnehb/network.hpp"
#include "dnehb/solver.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void bench_step(std::size_t firms, std::size_t markets, std::size_t dimension, std::size_t steps) {
  dnehb::CournotSampling spec;
  spec.firms = firms;
  spec.markets = markets;
  spec.dimension = dimension;
  const dnehb::CournotInstance inst = dnehb::sample_cournot(spec, 7);
  const dnehb::GameInstance game = dnehb::make_game(inst);
  const auto params = dnehb::SolverParams::uniform(firms, 0.01, 0.5);
  const dnehb::ScheduleGenerator gen(firms, 0.1, 7);
  std::vector<dnehb::MixingMatrix> sparse;
  std::vector<dnehb::RowMatrix> dense;
  for (std::size_t k = 0; k < 16; ++k) {
    sparse.push_back(dnehb::MixingMatrix::equal_in_neighbor(gen.graph(k)));
    dense.push_back(sparse.back().dense());
  }
  const dnehb::SolverState init = dnehb::random_initial_state(game, 7);

  dnehb::SolverState a = init;
  dnehb::StepWorkspace ws;
  auto t0 = Clock::now();
  for (std::size_t k = 0; k < steps; ++k) dnehb::advance(a, params, game, sparse[k % 16], ws);
  const double kernel = seconds_since(t0);

  dnehb::SolverState b = init;
  t0 = Clock::now();
  for (std::size_t k = 0; k < steps; ++k) b = dnehb::step_reference(b, params, game, dense[k % 16]);
  const double reference = seconds_since(t0);

  std::printf("%s\n", fmt::format("step m={} n={}: kernel {:.3g} us/step, reference {:.3g} us/step, "
                                  "max |diff| {:.3g}",
                                  firms, dimension, 1e6 * kernel / steps, 1e6 * reference / steps,
                                  (a.z - b.z).cwiseAbs().maxCoeff())
                          .c_str());
}

void bench_batch(std::size_t seeds) {
  dnehb::ExperimentConfig cfg;
  cfg.seeds = dnehb::ExperimentConfig::default_seeds(seeds, 0);
  cfg.plot_seeds = 0;
  const int threads = omp_get_max_threads();
  for (int t : {1, threads}) {
    omp_set_num_threads(t);
    const auto t0 = Clock::now();
    const auto records = dnehb::run_experiment(cfg);
    std::printf("%s\n", fmt::format("batch of {} seeds on {} thread(s): {:.3g} s ({} runs)", seeds, t,
                                    seconds_since(t0), records.size())
                            .c_str());
    if (threads == 1) break;
  }
  omp_set_num_threads(threads);
}

}  // namespace

int main() {
  bench_step(20, 7, 32, 20000);
  bench_step(100, 20, 400, 500);
  bench_step(200, 40, 1600, 50);
  bench_batch(8);
  return 0;
}
