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

#include "dnehb/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "dnehb/errors.hpp"
#include "dnehb/rng.hpp"

namespace dnehb {

Digraph::Digraph(std::size_t nodes, std::vector<Edge> edges)
    : edges_(std::move(edges)), in_(nodes), out_(nodes) {
  if (nodes == 0) throw InputError("graph needs at least one node");
  for (const Edge& e : edges_) {
    if (e.from >= nodes || e.to >= nodes) throw InputError("edge endpoint out of range");
  }
  std::ranges::sort(edges_);
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (const Edge& e : edges_) {
    out_[e.from].push_back(e.to);
    in_[e.to].push_back(e.from);
  }
  for (auto& v : in_) std::ranges::sort(v);
}

Digraph Digraph::directed_cycle(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    edges.push_back({i, i});
    if (m > 1) edges.push_back({i, (i + 1) % m});
  }
  return Digraph(m, std::move(edges));
}

Digraph Digraph::complete(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) edges.push_back({j, i});
  }
  return Digraph(m, std::move(edges));
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
  if (from >= nodes() || to >= nodes()) return false;
  return std::ranges::binary_search(out_[from], to);
}

bool Digraph::has_all_self_loops() const {
  for (std::size_t i = 0; i < nodes(); ++i) {
    if (!has_edge(i, i)) return false;
  }
  return true;
}

namespace {

std::size_t count_reachable(std::size_t start, const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  const std::size_t m = g.nodes();
  std::vector<std::vector<std::size_t>> fwd(m), bwd(m);
  for (std::size_t i = 0; i < m; ++i) {
    fwd[i] = g.out_neighbors(i);
    bwd[i] = g.in_neighbors(i);
  }
  return count_reachable(0, fwd) == m && count_reachable(0, bwd) == m;
}

bool satisfies_graph_assumption(const Digraph& g) {
  return g.has_all_self_loops() && is_strongly_connected(g);
}

GraphMetrics graph_metrics(const Digraph& g) {
  if (!is_strongly_connected(g)) throw InputError("graph metrics need a strongly connected graph");
  const std::size_t m = g.nodes();
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> utility(m * m, 0);
  GraphMetrics metrics;
  std::vector<std::size_t> dist(m), parent(m);
  for (std::size_t src = 0; src < m; ++src) {
    std::ranges::fill(dist, kUnseen);
    dist[src] = 0;
    parent[src] = src;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : g.out_neighbors(u)) {
        if (dist[v] == kUnseen) {
          dist[v] = dist[u] + 1;
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t dst = 0; dst < m; ++dst) {
      if (dst == src) continue;
      metrics.diameter = std::max(metrics.diameter, dist[dst]);
      for (std::size_t v = dst; v != src; v = parent[v]) ++utility[parent[v] * m + v];
    }
  }
  metrics.max_edge_utility = m > 1 ? std::ranges::max(utility) : 0;
  return metrics;
}

DigraphSchedule::DigraphSchedule(std::vector<Digraph> graphs) : graphs_(std::move(graphs)) {
  if (graphs_.empty()) throw InputError("schedule needs at least one graph");
  const std::size_t m = graphs_.front().nodes();
  metrics_.reserve(graphs_.size());
  for (std::size_t k = 0; k < graphs_.size(); ++k) {
    const Digraph& g = graphs_[k];
    if (g.nodes() != m) throw InputError("all graphs of a schedule need the same node count");
    if (!satisfies_graph_assumption(g)) {
      throw InputError("graph " + std::to_string(k) +
                       " lacks a self-loop or is not strongly connected");
    }
    metrics_.push_back(graph_metrics(g));
  }
}

ScheduleGenerator::ScheduleGenerator(std::size_t nodes, double density, std::uint64_t seed)
    : nodes_(nodes), density_(density), seed_(seed) {
  if (nodes < 2) throw InputError("schedule generation needs at least two nodes");
  if (!(density >= 0.0 && density <= 1.0)) throw InputError("edge density must lie in [0, 1]");
}

Digraph ScheduleGenerator::graph(std::size_t k) const {
  Rng rng(seed_, streams::kGraphBase + k);
  std::vector<std::size_t> order(nodes_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes_; ++i) {
    edges.push_back({i, i});
    edges.push_back({order[i], order[(i + 1) % nodes_]});
  }
  for (std::size_t from = 0; from < nodes_; ++from) {
    for (std::size_t to = 0; to < nodes_; ++to) {
      if (from == to) continue;
      if (rng.bernoulli(density_)) edges.push_back({from, to});
    }
  }
  return Digraph(nodes_, std::move(edges));
}

DigraphSchedule generate_schedule(std::size_t nodes, std::size_t horizon, double density,
                                  std::uint64_t seed) {
  if (horizon == 0) throw InputError("schedule horizon must be at least 1");
  ScheduleGenerator gen(nodes, density, seed);
  std::vector<Digraph> graphs;
  graphs.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) graphs.push_back(gen.graph(k));
  return DigraphSchedule(std::move(graphs));
}

MixingMatrix MixingMatrix::equal_in_neighbor(const Digraph& g) {
  MixingMatrix w;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const auto& nin = g.in_neighbors(i);
    if (nin.empty()) throw InputError("node without in-neighbors cannot mix");
    const double weight = 1.0 / static_cast<double>(nin.size());
    for (std::size_t j : nin) w.entries_.push_back({j, weight});
    w.row_start_.push_back(w.entries_.size());
  }
  return w;
}

MixingMatrix MixingMatrix::from_dense(const RowMatrix& dense) {
  if (dense.rows() == 0 || dense.rows() != dense.cols()) {
    throw InputError("mixing matrix must be square and non-empty");
  }
  MixingMatrix w;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      if (!(v >= 0.0)) throw InputError("mixing matrix has a negative or NaN entry");
      if (v > 0.0) w.entries_.push_back({static_cast<std::size_t>(j), v});
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InputError("mixing matrix is not row-stochastic");
    w.row_start_.push_back(w.entries_.size());
  }
  return w;
}

RowMatrix MixingMatrix::dense() const {
  const auto m = static_cast<Eigen::Index>(size());
  RowMatrix d = RowMatrix::Zero(m, m);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const Entry& e : row(i)) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = e.weight;
  }
  return d;
}

double MixingMatrix::min_positive() const {
  double best = std::numeric_limits<double>::infinity();
  for (const Entry& e : entries_) best = std::min(best, e.weight);
  return best;
}

bool MixingMatrix::compatible_with(const Digraph& g) const {
  if (g.nodes() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = row(i);
    const auto& nin = g.in_neighbors(i);
    if (r.size() != nin.size()) return false;
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (r[t].col != nin[t] || !(r[t].weight > 0.0)) return false;
    }
  }
  return true;
}

Vector MixingMatrix::transpose_times(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != size()) throw InputError("vector length mismatch");
  Vector out = Vector::Zero(v.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double vi = v(static_cast<Eigen::Index>(i));
    for (const Entry& e : row(i)) out(static_cast<Eigen::Index>(e.col)) += e.weight * vi;
  }
  return out;
}

namespace {

bool is_stochastic(const Vector& v, double tol) {
  if (v.size() == 0 || !(v.minCoeff() >= 0.0)) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

}  // namespace

WeightSchedule build_weights(const DigraphSchedule& schedule) {
  WeightSchedule ws;
  ws.weights.reserve(schedule.horizon());
  ws.floor = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < schedule.horizon(); ++k) {
    ws.weights.push_back(MixingMatrix::equal_in_neighbor(schedule.graph(k)));
    ws.floor = std::min(ws.floor, ws.weights.back().min_positive());
  }
  ws.metrics = schedule.metrics();
  const auto m = static_cast<Eigen::Index>(schedule.nodes());
  ws.pi = backward_pi(ws, Vector::Constant(m, 1.0 / static_cast<double>(m)));
  return ws;
}

WeightSchedule build_weights(const ScheduleGenerator& generator, std::size_t horizon) {
  if (horizon == 0) throw InputError("horizon must be >= 1");
  WeightSchedule ws;
  ws.weights.reserve(horizon);
  ws.metrics.reserve(horizon);
  ws.floor = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < horizon; ++k) {
    const Digraph g = generator.graph(k);
    ws.metrics.push_back(graph_metrics(g));
    ws.weights.push_back(MixingMatrix::equal_in_neighbor(g));
    ws.floor = std::min(ws.floor, ws.weights.back().min_positive());
  }
  const auto m = static_cast<Eigen::Index>(generator.nodes());
  ws.pi = backward_pi(ws, Vector::Constant(m, 1.0 / static_cast<double>(m)));
  return ws;
}

std::vector<Vector> backward_pi(const WeightSchedule& ws, const Vector& anchor) {
  if (ws.weights.empty()) throw InputError("weight schedule is empty");
  if (static_cast<std::size_t>(anchor.size()) != ws.nodes() || !is_stochastic(anchor, 1e-12)) {
    throw InputError("anchor must be a stochastic vector of length m");
  }
  const std::size_t horizon = ws.horizon();
  std::vector<Vector> pi(horizon + 1);
  pi[horizon] = anchor;
  for (std::size_t k = horizon; k-- > 0;) pi[k] = ws.weights[k].transpose_times(pi[k + 1]);
  return pi;
}

double contraction_coefficient(const WeightSchedule& ws, std::size_t k) {
  if (k >= ws.horizon()) throw InputError("iteration index beyond the schedule horizon");
  if (ws.pi.size() != ws.horizon() + 1) throw ComputationError("pi sequence not computed");
  const double lo = ws.pi[k + 1].minCoeff();
  const double hi = ws.pi[k].maxCoeff();
  if (!(lo > 0.0) || !(hi > 0.0)) throw ComputationError("pi has a zero entry; c_k undefined");
  const GraphMetrics& g = ws.metrics[k];
  const double shrink = lo * ws.floor * ws.floor /
                        (hi * hi * static_cast<double>(g.diameter) * static_cast<double>(g.max_edge_utility));
  if (!(shrink > 0.0 && shrink < 1.0)) throw ComputationError("c_k radicand outside (0, 1)");
  return std::sqrt(1.0 - shrink);
}

ScheduleConstants schedule_constants(const WeightSchedule& ws) {
  if (ws.pi.size() != ws.horizon() + 1) throw ComputationError("pi sequence not computed");
  ScheduleConstants sc;
  sc.w = ws.floor;
  sc.sigma = std::numeric_limits<double>::infinity();
  for (const Vector& p : ws.pi) sc.sigma = std::min(sc.sigma, p.minCoeff());
  for (std::size_t k = 0; k < ws.horizon(); ++k) {
    sc.c = std::max(sc.c, contraction_coefficient(ws, k));
    sc.phi = std::max(sc.phi, 1.0 / std::sqrt(ws.pi[k + 1].minCoeff()));
  }
  return sc;
}

void write_edge_list(std::ostream& out, const DigraphSchedule& schedule) {
  out << "# edge (from, to): node 'to' receives from node 'from'\n";
  out << "m " << schedule.nodes() << '\n';
  out << "horizon " << schedule.horizon() << '\n';
  for (std::size_t k = 0; k < schedule.horizon(); ++k) {
    out << "k " << k << '\n';
    for (const Edge& e : schedule.graph(k).edges()) out << e.from << ' ' << e.to << '\n';
  }
}

DigraphSchedule read_edge_list(std::istream& in) {
  std::size_t m = 0, horizon = 0;
  std::vector<std::vector<Edge>> blocks;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw InputError("edge list line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "m") {
      ls >> m;
    } else if (head == "horizon") {
      ls >> horizon;
    } else if (head == "k") {
      std::size_t k = 0;
      ls >> k;
      if (k != blocks.size()) fail("blocks must appear in order");
      blocks.emplace_back();
    } else {
      if (blocks.empty()) fail("edge before the first block");
      std::istringstream es(line);
      Edge e{};
      if (!(es >> e.from >> e.to)) fail("expected '<from> <to>'");
      blocks.back().push_back(e);
    }
    if (ls.fail()) fail("malformed line");
  }
  if (m == 0 || blocks.size() != horizon) fail("header does not match the number of blocks");
  std::vector<Digraph> graphs;
  graphs.reserve(blocks.size());
  for (auto& b : blocks) graphs.emplace_back(m, std::move(b));
  return DigraphSchedule(std::move(graphs));
}

}  // namespace dnehb
