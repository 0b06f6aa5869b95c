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
#include <iosfwd>
#include <span>
#include <vector>

#include "dnehb/types.hpp"

namespace dnehb {

/// Directed edge (from, to): node `to` receives from node `from`.
struct Edge {
  std::size_t from;
  std::size_t to;
  auto operator<=>(const Edge&) const = default;
};

/// Directed graph on nodes 0..m-1 with sorted in/out adjacency lists.
/// General container; `satisfies_graph_assumption` checks self-loops and
/// strong connectivity.
class Digraph {
 public:
  Digraph(std::size_t nodes, std::vector<Edge> edges);

  /// 0 -> 1 -> ... -> m-1 -> 0 plus self-loops.
  static Digraph directed_cycle(std::size_t m);
  /// Every ordered pair, self-loops included.
  static Digraph complete(std::size_t m);

  std::size_t nodes() const { return in_.size(); }
  const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_[i]; }
  const std::vector<std::size_t>& out_neighbors(std::size_t i) const { return out_[i]; }
  bool has_edge(std::size_t from, std::size_t to) const;
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_all_self_loops() const;

 private:
  std::vector<Edge> edges_;  // sorted (from, to), unique
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> out_;
};

bool is_strongly_connected(const Digraph& g);

/// Self-loop at every node and strongly connected.
bool satisfies_graph_assumption(const Digraph& g);

struct GraphMetrics {
  std::size_t diameter = 0;
  std::size_t max_edge_utility = 0;
};

/// Diameter and maximal edge-utility.
///
/// One shortest path is selected per ordered pair (u, v), u != v: the BFS
/// tree path from u, where BFS expands out-neighbors in ascending index order
/// and a node keeps the first parent that discovers it. The edge-utility of
/// a non-self-loop edge is the number of selected paths that traverse it.
/// Throws InputError when g is not strongly connected.
GraphMetrics graph_metrics(const Digraph& g);

/// Sequence G_0..G_{K-1} together with the metrics of each member.
class DigraphSchedule {
 public:
  explicit DigraphSchedule(std::vector<Digraph> graphs);

  std::size_t horizon() const { return graphs_.size(); }
  std::size_t nodes() const { return graphs_.front().nodes(); }
  const Digraph& graph(std::size_t k) const { return graphs_[k]; }
  const GraphMetrics& metrics(std::size_t k) const { return metrics_[k]; }
  const std::vector<GraphMetrics>& metrics() const { return metrics_; }

 private:
  std::vector<Digraph> graphs_;
  std::vector<GraphMetrics> metrics_;
};

/// Random time-varying graphs. Graph k depends only on (seed, k): it draws
/// from Rng(seed, streams::kGraphBase + k) a uniformly shuffled node order
/// whose consecutive entries (cyclically) form a directed Hamiltonian cycle,
/// then one Bernoulli(p) draw per ordered pair (from, to), from != to, in
/// row-major order, adding the edge on success. Self-loops are always present.
class ScheduleGenerator {
 public:
  ScheduleGenerator(std::size_t nodes, double density, std::uint64_t seed);

  Digraph graph(std::size_t k) const;
  std::size_t nodes() const { return nodes_; }

 private:
  std::size_t nodes_;
  double density_;
  std::uint64_t seed_;
};

DigraphSchedule generate_schedule(std::size_t nodes, std::size_t horizon, double density,
                                  std::uint64_t seed);

/// Sparse row-stochastic mixing matrix (CSR, columns ascending per row).
class MixingMatrix {
 public:
  struct Entry {
    std::size_t col;
    double weight;
  };

  /// [W]_ij = 1 / |N_in(i)| for j in N_in(i).
  static MixingMatrix equal_in_neighbor(const Digraph& g);
  /// Keeps the positive entries of a dense matrix; throws InputError unless
  /// every entry is >= 0 and every row sums to 1 within 1e-12.
  static MixingMatrix from_dense(const RowMatrix& w);

  std::size_t size() const { return row_start_.size() - 1; }
  std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  RowMatrix dense() const;
  double min_positive() const;
  bool compatible_with(const Digraph& g) const;
  /// W' v.
  Vector transpose_times(const Vector& v) const;

 private:
  std::vector<std::size_t> row_start_{0};
  std::vector<Entry> entries_;
};

/// Mixing matrices W_0..W_{K-1}, their graph metrics and the backward
/// stochastic vectors pi_0..pi_K with pi_k' = pi_{k+1}' W_k.
struct WeightSchedule {
  std::vector<MixingMatrix> weights;
  std::vector<GraphMetrics> metrics;
  double floor = 0.0;  // w = min_k min+(W_k)
  std::vector<Vector> pi;

  std::size_t horizon() const { return weights.size(); }
  std::size_t nodes() const { return weights.front().size(); }
};

/// Equal in-neighbor weights, pi anchored at the uniform vector at k = K.
WeightSchedule build_weights(const DigraphSchedule& schedule);

/// Same for graphs 0..horizon-1 of a generator, without keeping the graphs.
WeightSchedule build_weights(const ScheduleGenerator& generator, std::size_t horizon);

/// pi_K = anchor, pi_k = W_k' pi_{k+1}. Throws InputError for a
/// non-stochastic anchor.
std::vector<Vector> backward_pi(const WeightSchedule& ws, const Vector& anchor);

/// c_k = sqrt(1 - min(pi_{k+1}) w^2 / (max(pi_k)^2 D(G_k) K(G_k))).
double contraction_coefficient(const WeightSchedule& ws, std::size_t k);

struct ScheduleConstants {
  double sigma = 0.0;  // min_k min(pi_k)
  double c = 0.0;      // max_k c_k
  double phi = 0.0;    // max_k 1 / sqrt(min(pi_{k+1}))
  double w = 0.0;
};

ScheduleConstants schedule_constants(const WeightSchedule& ws);

/// Text exchange format, one block per k:
///
///   m <nodes>
///   horizon <K>
///   k <index>
///   <from> <to>        one line per edge, 0-based, "to" receives from "from"
///
/// Lines starting with '#' are comments.
void write_edge_list(std::ostream& out, const DigraphSchedule& schedule);
DigraphSchedule read_edge_list(std::istream& in);

}  // namespace dnehb
