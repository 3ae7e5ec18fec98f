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

#ifndef CCT_FEASIBILITY_HPP
#define CCT_FEASIBILITY_HPP

#include <optional>
#include <vector>

#include "cct/instance.hpp"
#include "cct/matrix.hpp"

namespace cct {

/// Certificate of infeasibility: a source subset A and sink subset B with
/// f(A) + g(B) - hbar(A x B) = 1 + excess, excess > 0.
struct ViolatingPair {
  std::vector<int> sources;  // A
  std::vector<int> sinks;    // B
  double excess = 0.0;
};

struct FeasibilityVerdict {
  bool feasible = false;
  std::optional<Coupling> witness_coupling;      // present iff feasible (max-flow path)
  std::optional<IntMatrix> witness_units;        // same witness in exact units of 1/denom
  std::optional<ViolatingPair> violating_pair;   // present iff infeasible
};

/// Decides feasibility by exhausting all subset pairs (A, B) and testing
/// f(A) + g(B) - hbar(A x B) <= 1 in exact units. Produces the maximizing
/// pair on violation, never a witness coupling.
/// Throws SizeError when m + n > 22.
FeasibilityVerdict kellerer_check(const TransportInstance& inst);

/// Decides feasibility by integer max flow on the bipartite network
/// source -> i (cap f_i), i -> j (cap hbar_ij), j -> sink (cap g_j), all in
/// units of 1/denom. Feasible iff the max flow equals denom; returns the
/// middle-arc flow as witness, or converts the min cut into a violating
/// (A, B) pair.
FeasibilityVerdict maxflow_feasible(const TransportInstance& inst);

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, ViolatingPair pair)
      : Error(what), pair(std::move(pair)) {}
  ViolatingPair pair;
};

}  // namespace cct

#endif  // CCT_FEASIBILITY_HPP
