// Copyright 2026 the cct authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cct/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace cct {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
  int to;
  int rev;
  std::int64_t cap;
  double cost;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int node_count)
      : graph_(node_count), potential_(node_count, 0.0) {}

  int add_edge(int from, int to, std::int64_t cap, double cost) {
    const int id = static_cast<int>(graph_[from].size());
    graph_[from].push_back({to, static_cast<int>(graph_[to].size()), cap, cost});
    graph_[to].push_back({from, id, 0, -cost});
    return id;
  }

  std::int64_t residual(int from, int edge_id) const {
    return graph_[from][edge_id].cap;
  }

  // Pushes up to `demand` units from source to sink along successive
  // shortest paths. Returns the amount actually pushed (less than demand
  // means the sink became unreachable, i.e. the instance is infeasible).
  std::int64_t run(int source, int sink, std::int64_t demand) {
    bellman_ford_init(source);
    std::int64_t pushed = 0;
    while (pushed < demand) {
      if (!dijkstra(source, sink)) break;
      for (std::size_t v = 0; v < graph_.size(); ++v)
        potential_[v] += std::min(dist_[v], dist_[sink]);
      std::int64_t bottleneck = demand - pushed;
      for (int v = sink; v != source; v = parent_node_[v])
        bottleneck = std::min(bottleneck,
                              graph_[parent_node_[v]]
                                    [parent_arc_[v]].cap);
      for (int v = sink; v != source; v = parent_node_[v]) {
        Arc& arc = graph_[parent_node_[v]]
                         [parent_arc_[v]];
        arc.cap -= bottleneck;
        graph_[v][arc.rev].cap += bottleneck;
      }
      pushed += bottleneck;
    }
    return pushed;
  }

  // Residual-reachable set from `source`; the source side of a min cut when
  // the sink is unreachable.
  std::vector<bool> reachable(int source) const {
    std::vector<bool> seen(graph_.size(), false);
    std::queue<int> q;
    seen[source] = true;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& arc : graph_[u])
        if (arc.cap > 0 && !seen[arc.to]) {
          seen[arc.to] = true;
          q.push(arc.to);
        }
    }
    return seen;
  }

 private:
  void bellman_ford_init(int source) {
    std::vector<double> dist(graph_.size(), kInf);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < graph_.size(); ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < graph_.size(); ++u) {
        if (dist[u] == kInf) continue;
        for (const auto& arc : graph_[u]) {
          if (arc.cap <= 0) continue;
          const double nd = dist[u] + arc.cost;
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    for (std::size_t v = 0; v < graph_.size(); ++v)
      potential_[v] = dist[v] == kInf ? 0.0 : dist[v];
  }

  bool dijkstra(int source, int sink) {
    dist_.assign(graph_.size(), kInf);
    parent_node_.assign(graph_.size(), -1);
    parent_arc_.assign(graph_.size(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist_[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist_[u]) continue;
      for (int k = 0; k < static_cast<int>(graph_[u].size()); ++k) {
        const Arc& arc = graph_[u][k];
        if (arc.cap <= 0) continue;
        const double reduced =
            std::max(0.0, arc.cost + potential_[u] - potential_[arc.to]);
        const double nd = d + reduced;
        if (nd < dist_[arc.to]) {
          dist_[arc.to] = nd;
          parent_node_[arc.to] = u;
          parent_arc_[arc.to] = k;
          heap.push({nd, arc.to});
        }
      }
    }
    return dist_[sink] < kInf;
  }

  std::vector<std::vector<Arc>> graph_;
  std::vector<double> potential_;
  std::vector<double> dist_;
  std::vector<int> parent_node_;
  std::vector<int> parent_arc_;
};

// Residual arcs of a complete flow, in the exact enumeration order the
// certificate checker re-derives. Source and sink arcs are saturated by
// construction, so only their reverse directions remain.
template <typename Visit>
void for_each_residual_arc(const TransportInstance& inst, const IntMatrix& h_units,
                           Visit&& visit) {
  const int m = inst.m, n = inst.n;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (inst.hbar_units(i, j) <= 0) continue;
      if (h_units(i, j) < inst.hbar_units(i, j)) visit(1 + i, 1 + m + j, inst.cost(i, j));
      if (h_units(i, j) > 0) visit(1 + m + j, 1 + i, -inst.cost(i, j));
    }
  }
  for (int i = 0; i < m; ++i)
    if (inst.f_units[i] > 0) visit(1 + i, 0, 0.0);
  for (int j = 0; j < n; ++j)
    if (inst.g_units[j] > 0) visit(m + n + 1, 1 + m + j, 0.0);
}

// Pushes flow around cycles of strictly fractional cells until their
// bipartite support graph is a forest. Cycles among fractional cells have
// zero cost at an optimum, so the flow stays optimal while the solution
// moves to an extreme point of the polytope.
void cancel_fractional_cycles(const TransportInstance& inst, IntMatrix& h_units) {
  const int m = inst.m, n = inst.n;
  auto fractional = [&](int i, int j) {
    return h_units(i, j) > 0 && h_units(i, j) < inst.hbar_units(i, j);
  };

  while (true) {
    // Nodes 0..m-1 are rows, m..m+n-1 are columns; edges are fractional
    // cells. At most one edge joins any node pair, so cycle detection can
    // skip the DFS parent node.
    std::vector<std::vector<int>> adj(m + n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (fractional(i, j)) {
          adj[i].push_back(m + j);
          adj[m + j].push_back(i);
        }

    std::vector<int> state(m + n, 0);
    std::vector<int> parent(m + n, -1);
    int cycle_from = -1, cycle_to = -1;
    auto dfs = [&](auto&& self, int u) -> bool {
      state[u] = 1;
      for (const int v : adj[u]) {
        if (v == parent[u]) continue;
        if (state[v] == 1) {
          cycle_from = u;
          cycle_to = v;
          return true;
        }
        if (state[v] == 0) {
          parent[v] = u;
          if (self(self, v)) return true;
        }
      }
      state[u] = 2;
      return false;
    };
    for (int root = 0; root < m + n && cycle_from < 0; ++root)
      if (state[root] == 0) dfs(dfs, root);
    if (cycle_from < 0) return;

    std::vector<int> nodes;  // cycle_to ... cycle_from, closed by the back edge
    for (int w = cycle_from; w != cycle_to; w = parent[w])
      nodes.push_back(w);
    nodes.push_back(cycle_to);
    std::reverse(nodes.begin(), nodes.end());

    // Walking row -> column raises the crossed cell, column -> row lowers
    // it, so every row and column keeps its sum: a valid circulation.
    std::vector<std::pair<std::pair<int, int>, int>> signed_cells;  // ((i,j), sign)
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const int from = nodes[k];
      const int to = nodes[(k + 1) % nodes.size()];
      const int i = from < m ? from : to;
      const int j = (from < m ? to : from) - m;
      const int sign = from < m ? +1 : -1;
      signed_cells.push_back({{i, j}, sign});
    }

    double cycle_cost = 0.0;
    for (const auto& [cell, sign] : signed_cells) cycle_cost += sign * inst.cost(cell.first, cell.second);
    if (cycle_cost > 0.0)
      for (auto& [cell, sign] : signed_cells) sign = -sign;

    std::int64_t delta = std::numeric_limits<std::int64_t>::max();
    for (const auto& [cell, sign] : signed_cells) {
      const auto [i, j] = cell;
      delta = std::min(delta, sign > 0 ? inst.hbar_units(i, j) - h_units(i, j) : h_units(i, j));
    }
    for (const auto& [cell, sign] : signed_cells) h_units(cell.first, cell.second) += sign * delta;
  }
}

// Relaxes potentials over the residual arcs until no arc violates
// pi[v] <= pi[u] + cost, making the reduced-cost certificate hold in the
// very floating-point expressions the checker evaluates.
void refine_potentials(const TransportInstance& inst, const IntMatrix& h_units,
                       std::vector<double>& pi) {
  const int rounds = 4 * (inst.m + inst.n + 2) + 8;
  for (int r = 0; r < rounds; ++r) {
    bool changed = false;
    for_each_residual_arc(inst, h_units, [&](int u, int v, double cost) {
      const double bound = cost + pi[u];
      if (pi[v] > bound) {
        pi[v] = bound;
        changed = true;
      }
    });
    if (!changed) return;
  }
}

}  // namespace

ExactSolution mcf_solve(const TransportInstance& inst) {
  const int m = inst.m, n = inst.n;
  const int source = 0, sink = m + n + 1;

  MinCostFlow net(m + n + 2);
  for (int i = 0; i < m; ++i) net.add_edge(source, 1 + i, inst.f_units[i], 0.0);
  IntMatrix edge_id(m, n, -1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (inst.hbar_units(i, j) > 0)
        edge_id(i, j) = net.add_edge(1 + i, 1 + m + j, inst.hbar_units(i, j), inst.cost(i, j));
  for (int j = 0; j < n; ++j) net.add_edge(1 + m + j, sink, inst.g_units[j], 0.0);

  const std::int64_t pushed = net.run(source, sink, inst.denom);
  if (pushed < inst.denom) {
    const std::vector<bool> seen = net.reachable(source);
    ViolatingPair pair;
    for (int i = 0; i < m; ++i)
      if (seen[1 + i]) pair.sources.push_back(i);
    for (int j = 0; j < n; ++j)
      if (!seen[1 + m + j]) pair.sinks.push_back(j);
    pair.excess = static_cast<double>(inst.denom - pushed) / static_cast<double>(inst.denom);
    throw InfeasibleError(
        "mcf_solve: instance is infeasible, f(A)+g(B)-hbar(AxB) exceeds 1 by " +
            std::to_string(pair.excess),
        std::move(pair));
  }

  ExactSolution sol;
  sol.h_units = IntMatrix(m, n, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (edge_id(i, j) >= 0)
        sol.h_units(i, j) =
            inst.hbar_units(i, j) - net.residual(1 + i, static_cast<int>(edge_id(i, j)));

  cancel_fractional_cycles(inst, sol.h_units);

  sol.h_star = Coupling(m, n);
  sol.value = 0.0;
  sol.fractional_cells = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      sol.h_star(i, j) = static_cast<double>(sol.h_units(i, j)) / static_cast<double>(inst.denom);
      sol.value += inst.cost(i, j) * sol.h_star(i, j);
      if (sol.h_units(i, j) > 0 && sol.h_units(i, j) < inst.hbar_units(i, j))
        ++sol.fractional_cells;
    }
  }

  sol.potentials.assign(m + n + 2, 0.0);
  refine_potentials(inst, sol.h_units, sol.potentials);
  return sol;
}

OptimalityCheck check_oracle_certificate(const TransportInstance& inst,
                                         const ExactSolution& sol) {
  OptimalityCheck check;
  check.ok = true;
  check.worst_violation = 0.0;
  if (static_cast<int>(sol.potentials.size()) != inst.m + inst.n + 2) {
    check.ok = false;
    check.worst_violation = kInf;
    return check;
  }
  for_each_residual_arc(inst, sol.h_units, [&](int u, int v, double cost) {
    const double slack =
        (cost + sol.potentials[u]) - sol.potentials[v];
    if (slack < 0.0) {
      check.ok = false;
      check.worst_violation = std::max(check.worst_violation, -slack);
    }
  });
  return check;
}

}  // namespace cct
