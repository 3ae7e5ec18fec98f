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

#ifndef CCT_PENALTY_HPP
#define CCT_PENALTY_HPP

#include <functional>
#include <utility>
#include <vector>

#include "cct/instance.hpp"
#include "cct/matrix.hpp"

namespace cct {

// Quadratic-penalty relaxation of the transport problem: the hard marginal
// equalities are replaced by (1/2eps) * squared marginal residuals, the
// relaxed objective is minimized over the box 0 <= h <= hbar, and a feasible
// dual triple is recovered from the minimizer by an affine formula. These
// pieces certify each other through an exact duality identity.

/// Dual potentials: u on sources, v on sinks, w on cells. Feasibility means
/// w <= 0 and c + u + v - w >= 0 entrywise on the support of hbar.
struct DualTriple {
  std::vector<double> u;
  std::vector<double> v;
  Matrix w;
  double eps = 0.0;  // the eps it was built at; 0 marks an eps-free triple
};

struct PenalizedSolution {
  Coupling h_eps;
  double eps = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  double relaxed_value = 0.0;           // linear + penalties
  double linear_value = 0.0;            // sum c .* h
  double marginal_residual_x = 0.0;     // ||row sums - f||_2
  double marginal_residual_y = 0.0;     // ||col sums - g||_2
  std::vector<std::pair<int, int>> active_upper;  // cells at hbar within tau
  std::vector<std::pair<int, int>> active_lower;  // cells at 0 within tau
};

struct CertificateReport {
  double duality_identity_residual = 0.0;  // |relaxed primal - penalized dual|
  double comp_slack_1 = 0.0;               // max |(c+u+v-w) .* h|
  double comp_slack_2 = 0.0;               // max |w .* (hbar-h)|
  double el_violation = 0.0;               // worst sign-condition violation
  bool dual_feasible = false;
};

struct CostBreakdown {
  double linear = 0.0;
  double penalty_x = 0.0;
  double penalty_y = 0.0;
  double relaxed = 0.0;
};

struct DualValues {
  double J = 0.0;
  double J_eps = 0.0;
};

/// Relaxed objective split into its parts:
/// relaxed = sum(c.*h) + (1/2eps)||rowsum(h)-f||^2 + (1/2eps)||colsum(h)-g||^2.
CostBreakdown evaluate_costs(const TransportInstance& inst, const Coupling& h, double eps);

/// Gradient of the relaxed objective:
/// grad_ij = c_ij + (rowsum_i - f_i)/eps + (colsum_j - g_j)/eps.
Matrix gradient(const TransportInstance& inst, const Coupling& h, double eps);

/// Worst violation of the box first-order conditions over the support of
/// hbar: max(0,-grad) at the lower bound, max(0,grad) at the upper bound,
/// |grad| in the interior. Zero exactly at a constrained minimizer.
double kkt_residual(const TransportInstance& inst, const Coupling& h, double eps);

struct SolveOptions {
  // Nesterov-style acceleration with restarts on objective increase.
  // Off by default: plain projected gradient is monotone and that property
  // is tested.
  bool momentum = false;
  // Observer called once per iteration with (iteration, relaxed objective).
  std::function<void(int, double)> on_iteration;
};

class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, PenalizedSolution best)
      : Error(what), best(std::move(best)) {}
  PenalizedSolution best;  // last iterate and its residual
};

/// Minimizes the relaxed objective over the box by projected gradient
/// descent with fixed step eps/(m+n), stopping at kkt_residual <= tol_kkt.
/// Deterministic in its inputs. Throws IterationLimitError carrying the
/// best iterate when max_iter is exhausted.
PenalizedSolution solve_penalized(const TransportInstance& inst, double eps,
                                  const Coupling& init, double tol_kkt, int max_iter,
                                  const SolveOptions& options = {});

/// Affine dual recovery from a penalized solution:
/// u_i = (rowsum_i - f_i)/eps, v_j = (colsum_j - g_j)/eps,
/// w_ij = min(c_ij + u_i + v_j, 0). Feasible by construction.
DualTriple dual_from_primal(const TransportInstance& inst, const PenalizedSolution& sol);

/// True when w <= 0 and c + u + v - w >= 0 (within tol) on the support of hbar.
bool is_dual_feasible(const TransportInstance& inst, const DualTriple& t, double tol = 0.0);

/// Dual objective J = -sum(u.*f) - sum(v.*g) + sum(w.*hbar) and its
/// penalized version J_eps = J - (eps/2)(||u||^2 + ||v||^2). Throws
/// DualInfeasibleError if the triple violates its invariants.
DualValues dual_values(const TransportInstance& inst, const DualTriple& t, double eps);

/// Default active-set tolerance band: 1e-7 * max(hbar).
double default_tau_active(const TransportInstance& inst);

/// Duality-identity and complementarity residuals for a primal/dual pair,
/// with active sets determined by tau_active.
CertificateReport certify(const TransportInstance& inst, const PenalizedSolution& sol,
                          const DualTriple& t, double tau_active);

}  // namespace cct

#endif  // CCT_PENALTY_HPP
