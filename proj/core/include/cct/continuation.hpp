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

#ifndef CCT_CONTINUATION_HPP
#define CCT_CONTINUATION_HPP

#include <optional>
#include <vector>

#include "cct/instance.hpp"
#include "cct/penalty.hpp"

namespace cct {

/// Geometric eps schedule eps0 * ratio^k for k = 0..steps-1.
struct SweepSchedule {
  double eps0 = 1.0;
  double ratio = 0.5;
  int steps = 18;
  double tol_kkt = 1e-8;
  int max_iter = 200000;  // per-row base budget, scaled by max(1, 1/eps)
};

struct SweepRow {
  double eps = 0.0;
  double relaxed_value = 0.0;
  double linear_value = 0.0;
  double dual_J = 0.0;
  double dual_J_eps = 0.0;
  double eps_u_norm_sq = 0.0;  // eps * ||u||^2
  double eps_v_norm_sq = 0.0;  // eps * ||v||^2
  double marginal_residual_sq = 0.0;
  std::optional<double> oracle_gap;  // max primal/dual distance to the exact optimum
  int iterations = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double final_primal_estimate = 0.0;  // linear value at the smallest eps
  double final_dual_estimate = 0.0;    // dual J at the smallest eps
  std::optional<double> oracle_value;
};

class SweepAbortedError : public Error {
 public:
  SweepAbortedError(const std::string& what, SweepReport partial)
      : Error(what), partial(std::move(partial)) {}
  SweepReport partial;
};

/// Drives eps -> 0 over the schedule, warm-starting every solve from the
/// previous minimizer (the first solve starts from the max-flow witness).
/// Checks feasibility up front and throws InfeasibleError before any solve
/// on an infeasible instance. When with_oracle is set, solves the instance
/// exactly once and fills the per-row oracle gaps. Iteration-limit failures
/// surface as SweepAbortedError carrying the rows finished so far.
SweepReport sweep(const TransportInstance& inst, const SweepSchedule& sched,
                  bool with_oracle = false);

}  // namespace cct

#endif  // CCT_CONTINUATION_HPP
