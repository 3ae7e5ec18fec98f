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

#include "cct/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "cct/feasibility.hpp"
#include "cct/oracle.hpp"

namespace cct {
namespace {

void require_schedule(const SweepSchedule& sched) {
  if (!(sched.eps0 > 0.0)) throw Error("sweep: eps0 must be positive");
  if (!(sched.ratio > 0.0) || !(sched.ratio < 1.0))
    throw Error("sweep: ratio must lie in (0, 1)");
  if (sched.steps < 1) throw Error("sweep: steps must be >= 1");
  if (!(sched.tol_kkt > 0.0)) throw Error("sweep: tol_kkt must be positive");
  if (sched.max_iter < 1) throw Error("sweep: max_iter must be >= 1");
  if (!(sched.eps0 * std::pow(sched.ratio, sched.steps - 1) > 0.0))
    throw Error("sweep: schedule underflows to eps = 0");
}

// Smaller eps means a stiffer problem; the iteration budget grows with 1/eps
// while the KKT tolerance stays fixed, which keeps the duality-identity
// residual comparable across rows.
int row_budget(int max_iter, double eps) {
  const double scaled = std::ceil(static_cast<double>(max_iter) * std::max(1.0, 1.0 / eps));
  return scaled > static_cast<double>(std::numeric_limits<int>::max())
             ? std::numeric_limits<int>::max()
             : static_cast<int>(scaled);
}

}  // namespace

SweepReport sweep(const TransportInstance& inst, const SweepSchedule& sched, bool with_oracle) {
  require_schedule(sched);

  const FeasibilityVerdict verdict = maxflow_feasible(inst);
  if (!verdict.feasible)
    throw InfeasibleError("sweep: instance is infeasible, no coupling exists",
                          *verdict.violating_pair);

  SweepReport report;
  if (with_oracle) report.oracle_value = mcf_solve(inst).value;

  // The max-flow witness has exact marginals, so the first solve starts with
  // zero penalty.
  Coupling warm = *verdict.witness_coupling;

  double eps = sched.eps0;
  for (int k = 0; k < sched.steps; ++k) {
    PenalizedSolution sol;
    try {
      sol = solve_penalized(inst, eps, warm, sched.tol_kkt, row_budget(sched.max_iter, eps));
    } catch (const IterationLimitError& e) {
      throw SweepAbortedError("sweep: row " + std::to_string(k) + " (eps = " +
                                  std::to_string(eps) + ") hit the iteration limit: " + e.what(),
                              std::move(report));
    }

    const DualTriple triple = dual_from_primal(inst, sol);
    const DualValues dv = dual_values(inst, triple, eps);

    SweepRow row;
    row.eps = eps;
    row.relaxed_value = sol.relaxed_value;
    row.linear_value = sol.linear_value;
    row.dual_J = dv.J;
    row.dual_J_eps = dv.J_eps;
    double nu = 0.0, nv = 0.0;
    for (const double x : triple.u) nu += x * x;
    for (const double x : triple.v) nv += x * x;
    row.eps_u_norm_sq = eps * nu;
    row.eps_v_norm_sq = eps * nv;
    row.marginal_residual_sq = sol.marginal_residual_x * sol.marginal_residual_x +
                               sol.marginal_residual_y * sol.marginal_residual_y;
    if (report.oracle_value)
      row.oracle_gap = std::max(std::abs(sol.linear_value - *report.oracle_value),
                                std::abs(dv.J - *report.oracle_value));
    row.iterations = sol.iterations;
    report.rows.push_back(row);

    warm = std::move(sol.h_eps);
    eps *= sched.ratio;
  }

  report.final_primal_estimate = report.rows.back().linear_value;
  report.final_dual_estimate = report.rows.back().dual_J;
  return report;
}

}  // namespace cct
