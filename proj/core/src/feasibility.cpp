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

#include "cct/feasibility.hpp"

#include <algorithm>
#include <bit>
#include <queue>
#include <string>
#include <vector>

namespace cct {
namespace {

std::vector<int> mask_to_indices(std::uint32_t mask, int count) {
  std::vector<int> out;
  for (int i = 0; i < count; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

// Plain Dinic on integer capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int node_count) : graph_(node_count) {}

  int add_edge(int from, int to, std::int64_t cap) {
    const int id = static_cast<int>(graph_[from].size());
    graph_[from].push_back({to, static_cast<int>(graph_[to].size()), cap});
    graph_[to].push_back({from, id, 0});
    return id;
  }

  std::int64_t residual(int from, int edge_id) const {
    return graph_[from][edge_id].cap;
  }

  std::int64_t run(int source, int sink) {
    std::int64_t flow = 0;
    while (bfs(source, sink)) {
      iter_.assign(graph_.size(), 0);
      while (std::int64_t pushed = dfs(source, sink, INT64_MAX)) flow += pushed;
    }
    return flow;
  }

  // Nodes reachable from source in the final residual graph (source side of
  // a min cut).
  std::vector<bool> reachable(int source) const {
    std::vector<bool> seen(graph_.size(), false);
    std::queue<int> q;
    q.push(source);
    seen[source] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& e : graph_[u]) {
        if (e.cap > 0 && !seen[e.to]) {
          seen[e.to] = true;
          q.push(e.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int rev;
    std::int64_t cap;
  };

  bool bfs(int source, int sink) {
    level_.assign(graph_.size(), -1);
    std::queue<int> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& e : graph_[u]) {
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  std::int64_t dfs(int u, int sink, std::int64_t limit) {
    if (u == sink) return limit;
    for (auto& i = iter_[u]; i < static_cast<int>(graph_[u].size()); ++i) {
      Edge& e = graph_[u][i];
      if (e.cap <= 0 || level_[e.to] != level_[u] + 1) continue;
      const std::int64_t pushed = dfs(e.to, sink, std::min(limit, e.cap));
      if (pushed > 0) {
        e.cap -= pushed;
        graph_[e.to][e.rev].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

}  // namespace

FeasibilityVerdict kellerer_check(const TransportInstance& inst) {
  const int m = inst.m, n = inst.n;
  if (m + n > 22)
    throw SizeError("kellerer_check: m + n = " + std::to_string(m + n) +
                    " exceeds the enumeration bound 22");

  const std::uint32_t a_limit = 1u << m;
  const std::uint32_t b_limit = 1u << n;

  // For each source set A, sweep all sink sets B by adding one index at a
  // time: value(A, B) = f(A) + sum_{j in B} (g_j - hbar(A x {j})).
  std::vector<std::int64_t> value(b_limit);
  std::vector<std::int64_t> col_under_a(n);

  std::int64_t best = 0;
  std::uint32_t best_a = 0, best_b = 0;
  for (std::uint32_t a = 0; a < a_limit; ++a) {
    std::int64_t f_a = 0;
    std::fill(col_under_a.begin(), col_under_a.end(), 0);
    for (int i = 0; i < m; ++i) {
      if (!(a & (1u << i))) continue;
      f_a += inst.f_units[i];
      for (int j = 0; j < n; ++j) col_under_a[j] += inst.hbar_units(i, j);
    }
    value[0] = f_a;
    for (std::uint32_t b = 1; b < b_limit; ++b) {
      const int j = std::countr_zero(b);
      value[b] = value[b & (b - 1)] + inst.g_units[j] -
                 col_under_a[j];
      if (value[b] > best) {
        best = value[b];
        best_a = a;
        best_b = b;
      }
    }
    if (value[0] > best) {
      best = value[0];
      best_a = a;
      best_b = 0;
    }
  }

  FeasibilityVerdict verdict;
  verdict.feasible = best <= inst.denom;
  if (!verdict.feasible) {
    ViolatingPair pair;
    pair.sources = mask_to_indices(best_a, m);
    pair.sinks = mask_to_indices(best_b, n);
    pair.excess = static_cast<double>(best - inst.denom) / static_cast<double>(inst.denom);
    verdict.violating_pair = std::move(pair);
  }
  return verdict;
}

FeasibilityVerdict maxflow_feasible(const TransportInstance& inst) {
  const int m = inst.m, n = inst.n;
  const int source = 0, sink = m + n + 1;

  MaxFlow net(m + n + 2);
  for (int i = 0; i < m; ++i) net.add_edge(source, 1 + i, inst.f_units[i]);
  IntMatrix edge_id(m, n, -1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (inst.hbar_units(i, j) > 0)
        edge_id(i, j) = net.add_edge(1 + i, 1 + m + j, inst.hbar_units(i, j));
  for (int j = 0; j < n; ++j) net.add_edge(1 + m + j, sink, inst.g_units[j]);

  const std::int64_t flow = net.run(source, sink);

  FeasibilityVerdict verdict;
  verdict.feasible = flow == inst.denom;
  if (verdict.feasible) {
    IntMatrix units(m, n, 0);
    Coupling h(m, n, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (edge_id(i, j) < 0) continue;
        const std::int64_t used =
            inst.hbar_units(i, j) - net.residual(1 + i, static_cast<int>(edge_id(i, j)));
        units(i, j) = used;
        h(i, j) = static_cast<double>(used) / static_cast<double>(inst.denom);
      }
    }
    verdict.witness_units = std::move(units);
    verdict.witness_coupling = std::move(h);
  } else {
    // Source side of the min cut: A = reachable sources, B = unreachable
    // sinks; then f(A) + g(B) - hbar(A x B) = 2 - maxflow > 1.
    const std::vector<bool> seen = net.reachable(source);
    ViolatingPair pair;
    for (int i = 0; i < m; ++i)
      if (seen[1 + i]) pair.sources.push_back(i);
    for (int j = 0; j < n; ++j)
      if (!seen[1 + m + j]) pair.sinks.push_back(j);
    pair.excess = static_cast<double>(inst.denom - flow) / static_cast<double>(inst.denom);
    verdict.violating_pair = std::move(pair);
  }
  return verdict;
}

}  // namespace cct
