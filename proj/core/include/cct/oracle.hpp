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

#ifndef CCT_ORACLE_HPP
#define CCT_ORACLE_HPP

#include <vector>

#include "cct/feasibility.hpp"
#include "cct/instance.hpp"
#include "cct/matrix.hpp"

namespace cct {

/// Exact optimum of the discrete transport LP, computed by successive
/// shortest paths on integer-scaled masses. Flows are exact rationals over
/// denom; only the cost summation is floating point.
struct ExactSolution {
  Coupling h_star;         // optimal plan, entries are multiples of 1/denom
  IntMatrix h_units;       // the same plan in exact units
  double value = 0.0;      // sum c .* h_star
  int fractional_cells = 0;  // cells with 0 < h < hbar strictly
  std::vector<double> potentials;  // node potentials, size m + n + 2
                                   // (source, sources..., sinks..., sink)
};

/// Solves min sum(c .* h) over couplings 0 <= h <= hbar with exact marginals,
/// via min-cost flow with node potentials (Bellman-Ford initialization, then
/// Dijkstra on reduced costs). Throws InfeasibleError with a violating
/// (A, B) pair when no coupling exists.
ExactSolution mcf_solve(const TransportInstance& inst);

struct OptimalityCheck {
  bool ok = false;
  double worst_violation = 0.0;  // most negative residual-arc reduced cost, as >= 0
};

/// Re-derives every residual arc of the returned flow and checks its reduced
/// cost against the stored potentials, using the same floating-point
/// expressions the solver used. ok means no violation at all.
OptimalityCheck check_oracle_certificate(const TransportInstance& inst,
                                         const ExactSolution& sol);

}  // namespace cct

#endif  // CCT_ORACLE_HPP
